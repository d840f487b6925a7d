//! The one-dimensional bootstrap process induced on the boundary line of a
//! stable direction, and standalone 1D closures with certified termination.

use super::strip::{ClosureBudget, ClosureOutcome, ShearMap, StripRules, StripRun};
use super::DynamicsError;
use crate::family::UpdateFamily;
use crate::geometry::{dot, Direction};
use crate::stability::stability_profile;

/// A one-dimensional update family: finite sets of nonzero integer offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneDFamily {
    rules: Vec<Vec<i64>>,
    step_norm_sq: i64,
}

impl OneDFamily {
    pub fn new(rules: Vec<Vec<i64>>) -> Result<OneDFamily, DynamicsError> {
        let mut canonical = Vec::with_capacity(rules.len());
        for (i, r) in rules.iter().enumerate() {
            if r.is_empty() {
                return Err(DynamicsError::InvalidOneD(format!("rule {i} is empty")));
            }
            if r.contains(&0) {
                return Err(DynamicsError::InvalidOneD(format!("rule {i} contains 0")));
            }
            let mut r = r.clone();
            r.sort_unstable();
            r.dedup();
            canonical.push(r);
        }
        canonical.sort();
        canonical.dedup();
        Ok(OneDFamily { rules: canonical, step_norm_sq: 1 })
    }

    pub fn rules(&self) -> &[Vec<i64>] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Diameter of the 1D family: twice the largest absolute offset.
    pub fn d1(&self) -> i64 {
        2 * self
            .rules
            .iter()
            .flat_map(|r| r.iter().map(|s| s.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Squared lattice length of one step along the line this family was
    /// induced from (1 for hand-built families).
    pub fn step_norm_sq(&self) -> i64 {
        self.step_norm_sq
    }

    /// Distance bound for finite closures: a finite closure stays within
    /// `d1^2 * 2^d1` of the seed, so escaping it certifies infinite growth.
    pub fn paper_distance_bound(&self) -> i64 {
        let d = self.d1();
        if d >= 56 {
            return i64::MAX / 4;
        }
        (d * d).saturating_mul(1i64 << d).max(1)
    }
}

/// Projects the dynamics of a stable direction onto its boundary line: rules
/// contained in the closed lower half-plane survive as their on-line parts,
/// written in units of the primitive vector spanning the line; all other
/// rules can never fire with only the half-plane and the line infected.
pub fn induced_1d(family: &UpdateFamily, u: &Direction) -> Result<OneDFamily, DynamicsError> {
    let profile = stability_profile(family);
    if profile.is_unstable(u) {
        return Err(DynamicsError::Unstable(*u));
    }
    let shear = ShearMap::new(u);
    let up = u.as_point();
    let mut rules = Vec::new();
    for rule in family.rules() {
        if rule.sites().iter().any(|s| dot(s, &up) > 0) {
            continue;
        }
        let line_sites: Result<Vec<i64>, DynamicsError> = rule
            .sites()
            .iter()
            .filter(|s| dot(s, &up) == 0)
            .map(|s| shear.to_strip(s).map(|(t, _)| t))
            .collect();
        let line_sites = line_sites?;
        debug_assert!(!line_sites.is_empty(), "rule below the line contradicts stability");
        rules.push(line_sites);
    }
    let mut f = OneDFamily::new(rules)?;
    f.step_norm_sq = shear.step_norm_sq();
    Ok(f)
}

/// How a 1D closure certifies infinite growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// Escape beyond the `d1^2 * 2^d1` distance bound certifies infinity; the
    /// window is sized past the bound, so every run terminates decisively.
    PaperBound,
    /// Doubling windows; infinity is certified only by a replay-verified
    /// translate repetition.
    Adaptive,
}

pub fn closure_1d(family: &OneDFamily, seed: &[i64], mode: BoundMode) -> ClosureOutcome {
    let budget = match mode {
        BoundMode::PaperBound => {
            let bound = family.paper_distance_bound();
            ClosureBudget {
                window_half_width: bound.saturating_add(2 * family.d1() + 64),
                step_budget: u64::MAX / 2,
                escape_radius: None,
                escape_beyond_seed: Some(bound),
                allow_repetition: false,
            }
        }
        BoundMode::Adaptive => ClosureBudget::default(),
    };
    closure_1d_with(family, seed, &budget)
}

/// 1D closure with explicit budget knobs (used by oracles that pin their own
/// window radius).
pub fn closure_1d_with(family: &OneDFamily, seed: &[i64], budget: &ClosureBudget) -> ClosureOutcome {
    let sheared: Vec<Vec<(i64, i64)>> = family
        .rules
        .iter()
        .map(|r| r.iter().map(|&s| (s, 0)).collect())
        .collect();
    let rules = StripRules::from_sheared(sheared);
    let shear = ShearMap::line();
    let strip_seed: Vec<(i64, i64)> = {
        let mut s: Vec<i64> = seed.to_vec();
        s.sort_unstable();
        s.dedup();
        s.into_iter().map(|t| (t, 0)).collect()
    };
    StripRun::new(&rules, &shear, &strip_seed, budget).run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ClosureStatus, GrowthCertificate};
    use crate::family::named_family;
    use crate::geometry::LatticePoint;

    fn d(x: i64, y: i64) -> Direction {
        Direction::new(x, y).unwrap()
    }

    fn sites_1d(out: &ClosureOutcome) -> Vec<i64> {
        out.outside_sites().iter().map(|z| z.x).collect()
    }

    #[test]
    fn toy_right_direction_projects_to_two_rules() {
        let toy = named_family("toy", None).unwrap();
        let f1 = induced_1d(&toy, &d(1, 0)).unwrap();
        assert_eq!(f1.rules(), &[vec![-2, -1], vec![1]]);
        assert_eq!(f1.step_norm_sq(), 1);
        // Oracle check: a single site infects the whole line under this
        // induced family.
        let out = closure_1d(&f1, &[0], BoundMode::Adaptive);
        assert_eq!(out.status, ClosureStatus::CertifiedInfinite);
    }

    #[test]
    fn appendix_family_projects_to_the_1d_pair() {
        for k in 2..=4 {
            let f = named_family("appendix_uk", Some(k)).unwrap();
            let f1 = induced_1d(&f, &d(0, 1)).unwrap();
            assert_eq!(f1.rules(), &[vec![-k, -k + 1], vec![k - 1, k]]);
            assert_eq!(f1.d1(), 2 * k);
        }
    }

    #[test]
    fn modified_two_neighbour_projects_to_single_site_rules() {
        let f = named_family("modified_two_neighbour", None).unwrap();
        let f1 = induced_1d(&f, &d(0, 1)).unwrap();
        assert_eq!(f1.rules(), &[vec![-1], vec![1]]);
    }

    #[test]
    fn induced_rejects_unstable_direction() {
        let toy = named_family("toy", None).unwrap();
        assert_eq!(
            induced_1d(&toy, &d(1, 1)).unwrap_err(),
            DynamicsError::Unstable(d(1, 1))
        );
    }

    #[test]
    fn single_successor_rule_percolates_in_both_modes() {
        let f1 = OneDFamily::new(vec![vec![1]]).unwrap();
        let adaptive = closure_1d(&f1, &[0], BoundMode::Adaptive);
        assert_eq!(adaptive.status, ClosureStatus::CertifiedInfinite);
        assert!(matches!(
            adaptive.certificate,
            Some(GrowthCertificate::TranslateRepetition { .. })
        ));
        let paper = closure_1d(&f1, &[0], BoundMode::PaperBound);
        assert_eq!(paper.status, ClosureStatus::CertifiedInfinite);
        assert!(matches!(
            paper.certificate,
            Some(GrowthCertificate::EscapeBeyondPaperBound { .. })
        ));
    }

    #[test]
    fn appendix_pair_rules_at_k2() {
        let f1 = OneDFamily::new(vec![vec![2, 1], vec![-2, -1]]).unwrap();
        let single = closure_1d(&f1, &[0], BoundMode::Adaptive);
        assert_eq!(single.status, ClosureStatus::CertifiedFinite);
        assert_eq!(sites_1d(&single), vec![0]);

        let pair = closure_1d(&f1, &[0, 1], BoundMode::Adaptive);
        assert_eq!(pair.status, ClosureStatus::CertifiedInfinite);

        let pair_paper = closure_1d(&f1, &[0, 1], BoundMode::PaperBound);
        assert_eq!(pair_paper.status, ClosureStatus::CertifiedInfinite);
    }

    #[test]
    fn finite_closures_stay_within_paper_distance() {
        // Appendix k=2: every seed pair within the bound stabilizes close by.
        let f1 = OneDFamily::new(vec![vec![2, 1], vec![-2, -1]]).unwrap();
        let bound = f1.paper_distance_bound();
        assert_eq!(bound, 4 * 4 * 16);
        for gap in [2i64, 3, 7, 40] {
            let out = closure_1d(&f1, &[0, gap], BoundMode::PaperBound);
            assert_eq!(out.status, ClosureStatus::CertifiedFinite, "gap {gap}");
            for s in sites_1d(&out) {
                assert!((-bound..=gap + bound).contains(&s));
            }
        }
    }

    #[test]
    fn empty_family_is_inert() {
        let f1 = OneDFamily::new(vec![]).unwrap();
        let out = closure_1d(&f1, &[3, 5], BoundMode::Adaptive);
        assert_eq!(out.status, ClosureStatus::CertifiedFinite);
        assert_eq!(sites_1d(&out), vec![3, 5]);
    }

    #[test]
    fn one_d_outcomes_report_line_coordinates() {
        let f1 = OneDFamily::new(vec![vec![1, 2]]).unwrap();
        let out = closure_1d(&f1, &[0, 1, 2], BoundMode::Adaptive);
        assert_eq!(out.status, ClosureStatus::CertifiedInfinite);
        assert!(out.outside_sites().iter().all(|z| z.y == 0));
        assert!(out.outside_sites().contains(&LatticePoint::new(0, 0)));
    }

    #[test]
    fn invalid_one_d_families_rejected() {
        assert!(OneDFamily::new(vec![vec![]]).is_err());
        assert!(OneDFamily::new(vec![vec![0, 1]]).is_err());
    }
}
