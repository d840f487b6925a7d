//! Half-plane dynamics for an isolated stable direction.
//!
//! The lattice is sheared so that row `j` collects the sites with scalar
//! product `j` against the direction vector and column `t` walks along the
//! boundary line. Stability confines all growth to the rows spanned by the
//! seed, so the process runs on a finite-height strip of unbounded width.
//!
//! Termination is certificate-driven:
//! - finite: the windowed fixpoint stabilized with a healthy margin on both
//!   flanks wide enough that no rule can reach across, so the computed set is
//!   the exact closure;
//! - infinite: either a block of the current state provably re-infects its
//!   own translate (verified by an independent bounded replay), or, in
//!   paper-bounds mode, a site escaped beyond the configured radius.

use super::DynamicsError;
use crate::family::UpdateFamily;
use crate::geometry::{dot, Direction, LatticePoint};
use crate::stability::stability_profile;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Sheared coordinates: `z = t*w + j*e` with `w` the primitive vector along
/// the boundary line and `<e, u> = 1`.
#[derive(Debug, Clone)]
pub(crate) struct ShearMap {
    u: LatticePoint,
    w: LatticePoint,
    e: LatticePoint,
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

impl ShearMap {
    pub(crate) fn new(u: &Direction) -> ShearMap {
        let up = u.as_point();
        let w = u.rot90_ccw().as_point();
        let (g, ex, ey) = ext_gcd(up.x, up.y);
        debug_assert_eq!(g, 1, "direction vectors are primitive");
        let e = LatticePoint::new(ex, ey);
        debug_assert_eq!(dot(&e, &up), 1);
        ShearMap { u: up, w, e }
    }

    /// The fixed shear used by one-dimensional closures: column `t` is the
    /// lattice site `(t, 0)`.
    pub(crate) fn line() -> ShearMap {
        ShearMap {
            u: LatticePoint::new(0, -1),
            w: LatticePoint::new(1, 0),
            e: LatticePoint::new(0, -1),
        }
    }

    pub(crate) fn to_strip(&self, z: &LatticePoint) -> Result<(i64, i64), DynamicsError> {
        let j = dot(z, &self.u);
        let t = z.y as i128 * self.e.x as i128 - z.x as i128 * self.e.y as i128;
        let j = i64::try_from(j).map_err(|_| crate::geometry::GeometryError::Overflow)?;
        let t = i64::try_from(t).map_err(|_| crate::geometry::GeometryError::Overflow)?;
        debug_assert_eq!(self.to_lattice(t, j).unwrap(), *z);
        Ok((t, j))
    }

    pub(crate) fn to_lattice(&self, t: i64, j: i64) -> Result<LatticePoint, DynamicsError> {
        let x = (t as i128 * self.w.x as i128 + j as i128 * self.e.x as i128)
            .try_into()
            .map_err(|_| crate::geometry::GeometryError::Overflow)?;
        let y = (t as i128 * self.w.y as i128 + j as i128 * self.e.y as i128)
            .try_into()
            .map_err(|_| crate::geometry::GeometryError::Overflow)?;
        Ok(LatticePoint::new(x, y))
    }

    /// Squared lattice length of one column step.
    pub(crate) fn step_norm_sq(&self) -> i64 {
        self.w.x * self.w.x + self.w.y * self.w.y
    }
}

/// Rules in sheared coordinates, with the derived reach metrics used by the
/// windowed fixpoint and the difficulty search.
#[derive(Debug, Clone)]
pub(crate) struct StripRules {
    rules: Vec<Vec<(i64, i64)>>,
    stencil: Vec<(i64, i64)>,
    reach_t: i64,
    span_t: i64,
    span_j: i64,
}

impl StripRules {
    pub(crate) fn from_sheared(rules: Vec<Vec<(i64, i64)>>) -> StripRules {
        let mut stencil: Vec<(i64, i64)> = rules
            .iter()
            .flat_map(|r| r.iter().map(|&(dt, dj)| (-dt, -dj)))
            .collect();
        stencil.sort();
        stencil.dedup();
        let reach_t = rules
            .iter()
            .flat_map(|r| r.iter().map(|&(dt, _)| dt.abs()))
            .max()
            .unwrap_or(0);
        fn span(rules: &[Vec<(i64, i64)>], proj: fn(&(i64, i64)) -> i64) -> i64 {
            rules
                .iter()
                .map(|r| {
                    let lo = r.iter().map(proj).min().unwrap_or(0);
                    let hi = r.iter().map(proj).max().unwrap_or(0);
                    hi - lo
                })
                .max()
                .unwrap_or(0)
        }
        let span_t = span(&rules, |s| s.0);
        let span_j = span(&rules, |s| s.1);
        StripRules { rules, stencil, reach_t, span_t, span_j }
    }

    fn shear(family: &UpdateFamily, map: &ShearMap) -> Result<StripRules, DynamicsError> {
        let mut rules = Vec::with_capacity(family.rule_count());
        for rule in family.rules() {
            let sheared: Result<Vec<(i64, i64)>, DynamicsError> =
                rule.sites().iter().map(|s| map.to_strip(s)).collect();
            rules.push(sheared?);
        }
        Ok(StripRules::from_sheared(rules))
    }

    /// Largest per-rule column span; clusters farther apart than this cannot
    /// interact through a single rule application.
    pub(crate) fn span_t(&self) -> i64 {
        self.span_t
    }

    /// Largest per-rule row span; row bands farther apart cannot interact.
    pub(crate) fn span_j(&self) -> i64 {
        self.span_j
    }
}

/// Per-row sparse bit storage keyed by 64-column words.
#[derive(Debug, Clone, Default)]
struct SparseBits {
    words: HashMap<i64, u64>,
}

impl SparseBits {
    #[inline]
    fn get(&self, t: i64) -> bool {
        match self.words.get(&(t >> 6)) {
            Some(w) => w >> (t & 63) & 1 == 1,
            None => false,
        }
    }

    #[inline]
    fn set(&mut self, t: i64) -> bool {
        let w = self.words.entry(t >> 6).or_insert(0);
        let mask = 1u64 << (t & 63);
        if *w & mask == 0 {
            *w |= mask;
            true
        } else {
            false
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureStatus {
    CertifiedFinite,
    CertifiedInfinite,
    BudgetExhausted,
}

/// A replayable proof of unbounded growth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthCertificate {
    /// `block` is a subset of the closure whose own closure (together with
    /// the half-plane) infects `block + offset`; iterating the translation
    /// yields infections at unbounded distance.
    TranslateRepetition {
        block: Vec<LatticePoint>,
        offset: LatticePoint,
        replay_steps: u64,
    },
    /// A site escaped beyond the configured radius; sound under the bound
    /// formulas enabled by paper-bounds mode.
    EscapeBeyondPaperBound { site: LatticePoint, radius: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClosureStats {
    pub infected_outside: u64,
    pub steps: u64,
    /// How far the infected set extends beyond the seed bounding box, in
    /// column units (left, right).
    pub extent_left: i64,
    pub extent_right: i64,
    pub window: (i64, i64),
}

/// Result of a half-plane or one-dimensional closure run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureOutcome {
    pub status: ClosureStatus,
    pub certificate: Option<GrowthCertificate>,
    pub stats: ClosureStats,
    outside: Vec<LatticePoint>,
    truncated: bool,
}

impl ClosureOutcome {
    /// The infected sites outside the half-plane: the exact final set for
    /// `CertifiedFinite`, a partial state otherwise. Truncated above
    /// [`ClosureOutcome::EXPORT_CAP`] sites.
    pub fn outside_sites(&self) -> &[LatticePoint] {
        &self.outside
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub const EXPORT_CAP: usize = 200_000;
}

/// Budget knobs for a single closure run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureBudget {
    /// Cap on how far the window may extend beyond the seed bounding box.
    pub window_half_width: i64,
    /// Cap on the number of infection events.
    pub step_budget: u64,
    /// Certify infinite growth when a site reaches this l-infinity radius.
    pub escape_radius: Option<i64>,
    /// Certify infinite growth when a site gets this far from the seed
    /// bounding box (one-dimensional paper bound).
    pub escape_beyond_seed: Option<i64>,
    /// Attempt translate-repetition certificates.
    pub allow_repetition: bool,
}

impl Default for ClosureBudget {
    fn default() -> Self {
        ClosureBudget {
            window_half_width: 1 << 22,
            step_budget: 20_000_000,
            escape_radius: None,
            escape_beyond_seed: None,
            allow_repetition: true,
        }
    }
}

/// Reusable engine for closures of one `(family, direction)` pair.
pub struct HalfPlaneContext {
    u: Direction,
    shear: ShearMap,
    rules: StripRules,
}

impl HalfPlaneContext {
    /// Validates that `u` is an isolated stable direction of the family.
    pub fn new(family: &UpdateFamily, u: &Direction) -> Result<HalfPlaneContext, DynamicsError> {
        let profile = stability_profile(family);
        if profile.is_unstable(u) {
            return Err(DynamicsError::Unstable(*u));
        }
        if !profile.is_isolated_stable(u) {
            return Err(DynamicsError::NotIsolatedStable(*u));
        }
        Self::new_unchecked(family, u)
    }

    /// Builds the context without re-deriving the stability profile. The
    /// caller must have verified that `u` is isolated stable.
    pub(crate) fn new_unchecked(
        family: &UpdateFamily,
        u: &Direction,
    ) -> Result<HalfPlaneContext, DynamicsError> {
        let shear = ShearMap::new(u);
        let rules = StripRules::shear(family, &shear)?;
        debug_assert!(
            rules.rules.iter().all(|r| r.iter().any(|&(_, dj)| dj >= 0)),
            "a rule below the line would make the direction unstable"
        );
        Ok(HalfPlaneContext { u: *u, shear, rules })
    }

    pub fn direction(&self) -> &Direction {
        &self.u
    }

    pub(crate) fn rules(&self) -> &StripRules {
        &self.rules
    }

    pub(crate) fn shear(&self) -> &ShearMap {
        &self.shear
    }

    pub(crate) fn seed_to_strip(
        &self,
        seed: &[LatticePoint],
    ) -> Result<Vec<(i64, i64)>, DynamicsError> {
        let mut out = Vec::with_capacity(seed.len());
        for z in seed {
            let (t, j) = self.shear.to_strip(z)?;
            if j < 0 {
                return Err(DynamicsError::SeedInHalfPlane(*z));
            }
            out.push((t, j));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Runs the half-plane closure from the given seed.
    pub fn close(
        &self,
        seed: &[LatticePoint],
        budget: &ClosureBudget,
    ) -> Result<ClosureOutcome, DynamicsError> {
        let strip_seed = self.seed_to_strip(seed)?;
        Ok(self.close_strip(&strip_seed, budget))
    }

    pub(crate) fn close_strip(&self, seed: &[(i64, i64)], budget: &ClosureBudget) -> ClosureOutcome {
        StripRun::new(&self.rules, &self.shear, seed, budget).run()
    }
}

/// Convenience wrapper over [`HalfPlaneContext`] for one-off closures.
pub fn half_plane_closure(
    family: &UpdateFamily,
    u: &Direction,
    seed: &[LatticePoint],
    budget: &ClosureBudget,
) -> Result<ClosureOutcome, DynamicsError> {
    HalfPlaneContext::new(family, u)?.close(seed, budget)
}

pub(crate) struct StripRun<'a> {
    rules: &'a StripRules,
    shear: &'a ShearMap,
    budget: &'a ClosureBudget,
    height: i64,
    rows: Vec<SparseBits>,
    infected: u64,
    steps: u64,
    min_t: i64,
    max_t: i64,
    seed_min_t: i64,
    seed_max_t: i64,
    win: (i64, i64),
    escaped: Option<(i64, i64)>,
    worklist: Vec<(i64, i64)>,
}

impl<'a> StripRun<'a> {
    pub(crate) fn new(
        rules: &'a StripRules,
        shear: &'a ShearMap,
        seed: &[(i64, i64)],
        budget: &'a ClosureBudget,
    ) -> StripRun<'a> {
        let height = seed.iter().map(|&(_, j)| j).max().unwrap_or(0);
        let seed_min_t = seed.iter().map(|&(t, _)| t).min().unwrap_or(0);
        let seed_max_t = seed.iter().map(|&(t, _)| t).max().unwrap_or(0);
        let initial = (4 * (rules.reach_t + 1)).max(64).min(budget.window_half_width);
        let mut run = StripRun {
            rules,
            shear,
            budget,
            height,
            rows: vec![SparseBits::default(); (height + 1) as usize],
            infected: 0,
            steps: 0,
            min_t: i64::MAX,
            max_t: i64::MIN,
            seed_min_t,
            seed_max_t,
            win: (seed_min_t - initial, seed_max_t + initial),
            escaped: None,
            worklist: Vec::new(),
        };
        for &(t, j) in seed {
            run.infect(t, j);
        }
        run
    }

    #[inline]
    fn member(&self, t: i64, j: i64) -> bool {
        if j < 0 {
            return true;
        }
        if j > self.height {
            return false;
        }
        self.rows[j as usize].get(t)
    }

    fn fires(&self, t: i64, j: i64) -> bool {
        self.rules
            .rules
            .iter()
            .any(|rule| rule.iter().all(|&(dt, dj)| self.member(t + dt, j + dj)))
    }

    fn infect(&mut self, t: i64, j: i64) {
        if !self.rows[j as usize].set(t) {
            return;
        }
        self.infected += 1;
        self.steps += 1;
        let extends = t < self.min_t || t > self.max_t;
        self.min_t = self.min_t.min(t);
        self.max_t = self.max_t.max(t);
        if extends && self.escaped.is_none() {
            if let Some(d) = self.budget.escape_beyond_seed {
                if t > self.seed_max_t.saturating_add(d) || t < self.seed_min_t.saturating_sub(d) {
                    self.escaped = Some((t, j));
                }
            }
            if let Some(r) = self.budget.escape_radius {
                if let Ok(z) = self.shear.to_lattice(t, j) {
                    if z.norm_inf() >= r {
                        self.escaped = Some((t, j));
                    }
                }
            }
        }
        for &(dt, dj) in &self.rules.stencil {
            let (ct, cj) = (t + dt, j + dj);
            if cj >= 0 && cj <= self.height && !self.rows[cj as usize].get(ct) {
                self.worklist.push((ct, cj));
            }
        }
    }

    /// Drains the worklist restricted to the current window. Returns false if
    /// the step budget ran out or an escape certificate fired.
    fn fixpoint(&mut self) -> bool {
        while let Some((t, j)) = self.worklist.pop() {
            if t < self.win.0 || t > self.win.1 {
                continue;
            }
            if self.rows[j as usize].get(t) {
                continue;
            }
            if self.fires(t, j) {
                self.infect(t, j);
                if self.escaped.is_some() || self.steps >= self.budget.step_budget {
                    return false;
                }
            }
        }
        true
    }

    /// Pushes candidates adjacent to previously infected sites near newly
    /// opened window space on the given side.
    fn reseed_side(&mut self, boundary: i64, left: bool) {
        let reach = self.rules.reach_t;
        let (lo, hi) = if left {
            (boundary, boundary + reach)
        } else {
            (boundary - reach, boundary)
        };
        for j in 0..=self.height {
            for t in lo..=hi {
                if self.rows[j as usize].get(t) {
                    for &(dt, dj) in &self.rules.stencil {
                        let (ct, cj) = (t + dt, j + dj);
                        if cj >= 0 && cj <= self.height && !self.rows[cj as usize].get(ct) {
                            self.worklist.push((ct, cj));
                        }
                    }
                }
            }
        }
    }

    pub(crate) fn run(mut self) -> ClosureOutcome {
        if self.infected == 0 {
            return self.finish(ClosureStatus::CertifiedFinite, None);
        }
        loop {
            let clean = self.fixpoint();
            if let Some((t, j)) = self.escaped {
                let site = self.shear.to_lattice(t, j).unwrap_or(LatticePoint::ORIGIN);
                let radius = self
                    .budget
                    .escape_radius
                    .or(self.budget.escape_beyond_seed)
                    .unwrap_or(0);
                let cert = GrowthCertificate::EscapeBeyondPaperBound { site, radius };
                return self.finish(ClosureStatus::CertifiedInfinite, Some(cert));
            }
            if !clean {
                // Step budget exhausted: last attempt at a certificate.
                let mut cert = self.try_repetition(false);
                if cert.is_none() {
                    cert = self.try_repetition(true);
                }
                if let Some(cert) = cert {
                    return self.finish(ClosureStatus::CertifiedInfinite, Some(cert));
                }
                return self.finish(ClosureStatus::BudgetExhausted, None);
            }
            let margin = self.rules.reach_t;
            let left_dirty = self.min_t - self.win.0 <= margin;
            let right_dirty = self.win.1 - self.max_t <= margin;
            if !left_dirty && !right_dirty {
                return self.finish(ClosureStatus::CertifiedFinite, None);
            }
            if self.budget.allow_repetition {
                if right_dirty {
                    if let Some(cert) = self.try_repetition(false) {
                        return self.finish(ClosureStatus::CertifiedInfinite, Some(cert));
                    }
                }
                if left_dirty {
                    if let Some(cert) = self.try_repetition(true) {
                        return self.finish(ClosureStatus::CertifiedInfinite, Some(cert));
                    }
                }
            }
            let width = self.win.1 - self.win.0;
            let at_cap = self.seed_min_t - self.win.0 >= self.budget.window_half_width
                && self.win.1 - self.seed_max_t >= self.budget.window_half_width;
            if at_cap {
                return self.finish(ClosureStatus::BudgetExhausted, None);
            }
            if right_dirty {
                let old = self.win.1;
                self.win.1 = (self.win.1 + width)
                    .min(self.seed_max_t.saturating_add(self.budget.window_half_width));
                if self.win.1 > old {
                    self.reseed_side(old, false);
                }
            }
            if left_dirty {
                let old = self.win.0;
                self.win.0 = (self.win.0 - width)
                    .max(self.seed_min_t.saturating_sub(self.budget.window_half_width));
                if self.win.0 < old {
                    self.reseed_side(old, true);
                }
            }
        }
    }

    /// Per-column bit pattern of the strip (rows packed into one word).
    fn column_bits(&self, t: i64) -> u64 {
        let mut bits = 0u64;
        for j in 0..=self.height.min(63) {
            if self.rows[j as usize].get(t) {
                bits |= 1 << j;
            }
        }
        bits
    }

    /// Looks for two equal nonempty column blocks on the growth side and
    /// verifies by bounded replay that the earlier block re-infects its own
    /// translate. Soundness comes entirely from the replay.
    fn try_repetition(&mut self, left: bool) -> Option<GrowthCertificate> {
        if !self.budget.allow_repetition || self.height > 63 || self.infected == 0 {
            return None;
        }
        let wb = self.rules.span_t.max(1);
        let (scan_lo, scan_hi) = if left {
            (self.min_t, self.seed_min_t - wb)
        } else {
            (self.seed_max_t + 1, self.max_t - wb + 1)
        };
        if scan_hi - scan_lo < 2 * wb {
            return None;
        }
        let cols: Vec<u64> = (scan_lo..scan_lo + (scan_hi - scan_lo) + wb)
            .map(|t| self.column_bits(t))
            .collect();
        let mut seen: HashMap<&[u64], i64> = HashMap::new();
        let mut candidates: Vec<(i64, i64)> = Vec::new();
        for c in scan_lo..=scan_hi {
            let off = (c - scan_lo) as usize;
            let block = &cols[off..off + wb as usize];
            if block.iter().all(|&b| b == 0) {
                continue;
            }
            match seen.get(block) {
                Some(&b) if c >= b + wb => {
                    candidates.push((b, c));
                    if candidates.len() >= 8 {
                        break;
                    }
                }
                Some(_) => {}
                None => {
                    seen.insert(block, c);
                }
            }
        }
        for (b, c) in candidates {
            // Growth away from the seed: the block closer to the seed must
            // reproduce itself shifted outward.
            let (src, delta) = if left { (c, b - c) } else { (b, c - b) };
            if let Some(cert) = self.verify_repetition(src, wb, delta) {
                return Some(cert);
            }
        }
        None
    }

    /// Bounded replay: does the closure of `block` (with the half-plane)
    /// infect `block + delta` columns?
    fn verify_repetition(&self, src: i64, wb: i64, delta: i64) -> Option<GrowthCertificate> {
        let mut block = Vec::new();
        for t in src..src + wb {
            for j in 0..=self.height {
                if self.rows[j as usize].get(t) {
                    block.push((t, j));
                }
            }
        }
        debug_assert!(!block.is_empty());
        let width = wb + delta.abs() + 2 * self.rules.reach_t + 4;
        let replay_budget = ClosureBudget {
            window_half_width: width,
            step_budget: (width as u64)
                .saturating_mul((self.height + 1) as u64)
                .saturating_mul(8)
                .saturating_add(1024),
            escape_radius: None,
            escape_beyond_seed: None,
            allow_repetition: false,
        };
        let mut replay = StripRun::new(self.rules, self.shear, &block, &replay_budget);
        replay.fixpoint();
        let ok = block
            .iter()
            .all(|&(t, j)| replay.member(t + delta, j));
        if !ok {
            return None;
        }
        let steps = replay.steps;
        let lattice_block: Vec<LatticePoint> = block
            .iter()
            .filter_map(|&(t, j)| self.shear.to_lattice(t, j).ok())
            .collect();
        let offset = self.shear.to_lattice(delta, 0).ok()?;
        Some(GrowthCertificate::TranslateRepetition {
            block: lattice_block,
            offset,
            replay_steps: steps,
        })
    }

    fn finish(mut self, status: ClosureStatus, certificate: Option<GrowthCertificate>) -> ClosureOutcome {
        let (extent_left, extent_right) = if self.infected == 0 {
            (0, 0)
        } else {
            ((self.seed_min_t - self.min_t).max(0), (self.max_t - self.seed_max_t).max(0))
        };
        let stats = ClosureStats {
            infected_outside: self.infected,
            steps: self.steps,
            extent_left,
            extent_right,
            window: self.win,
        };
        let mut outside = Vec::new();
        let mut truncated = false;
        'export: for j in 0..=self.height {
            let mut keys: Vec<i64> = self.rows[j as usize].words.keys().copied().collect();
            keys.sort();
            for k in keys {
                let word = self.rows[j as usize].words[&k];
                for b in 0..64 {
                    if word >> b & 1 == 1 {
                        if outside.len() >= ClosureOutcome::EXPORT_CAP {
                            truncated = true;
                            break 'export;
                        }
                        if let Ok(z) = self.shear.to_lattice(k * 64 + b, j) {
                            outside.push(z);
                        }
                    }
                }
            }
        }
        outside.sort();
        self.rows.clear();
        ClosureOutcome { status, certificate, stats, outside, truncated }
    }
}

/// Replays a growth certificate against a family and direction, independent
/// of the search that produced it.
///
/// For a translate-repetition certificate this checks (a) that the block is
/// contained in the closure of the witness seed and (b) that the block alone
/// re-infects its own translate; together those imply unbounded growth by
/// monotonicity and translation invariance along the boundary line.
pub fn replay_certificate(
    family: &UpdateFamily,
    u: &Direction,
    witness: &[LatticePoint],
    certificate: &GrowthCertificate,
    budget: &ClosureBudget,
) -> Result<bool, DynamicsError> {
    let ctx = HalfPlaneContext::new(family, u)?;
    match certificate {
        GrowthCertificate::TranslateRepetition { block, offset, .. } => {
            if block.is_empty() {
                return Ok(false);
            }
            let block_strip = ctx.seed_to_strip(block)?;
            let (dt, dj) = ctx.shear.to_strip(offset)?;
            if dj != 0 || dt == 0 {
                return Ok(false);
            }
            // (a) block subset of the closure of the witness
            let seed_strip = ctx.seed_to_strip(witness)?;
            let mut run = StripRun::new(ctx.rules(), ctx.shear(), &seed_strip, budget);
            loop {
                run.fixpoint();
                if block_strip.iter().all(|&(t, j)| run.member(t, j)) {
                    break;
                }
                let width = run.win.1 - run.win.0;
                let lo_target = block_strip.iter().map(|&(t, _)| t).min().unwrap() - 2 * ctx.rules().reach_t;
                let hi_target = block_strip.iter().map(|&(t, _)| t).max().unwrap() + 2 * ctx.rules().reach_t;
                if run.steps >= budget.step_budget
                    || (run.win.0 <= lo_target && run.win.1 >= hi_target
                        && width >= 2 * budget.window_half_width)
                {
                    return Ok(false);
                }
                let (old_lo, old_hi) = run.win;
                run.win.0 = (run.win.0 - width).min(lo_target);
                run.win.1 = (run.win.1 + width).max(hi_target);
                run.reseed_side(old_lo, true);
                run.reseed_side(old_hi, false);
            }
            // (b) the block re-infects its translate on its own
            let mut replay = StripRun::new(ctx.rules(), ctx.shear(), &block_strip, budget);
            let mut ok = false;
            loop {
                replay.fixpoint();
                if block_strip.iter().all(|&(t, j)| replay.member(t + dt, j)) {
                    ok = true;
                    break;
                }
                if replay.steps >= budget.step_budget
                    || replay.win.1 - replay.win.0 >= 4 * (dt.abs() + ctx.rules().span_t + 64)
                {
                    break;
                }
                let (old_lo, old_hi) = replay.win;
                let width = old_hi - old_lo;
                replay.win = (old_lo - width, old_hi + width);
                replay.reseed_side(old_lo, true);
                replay.reseed_side(old_hi, false);
            }
            Ok(ok)
        }
        GrowthCertificate::EscapeBeyondPaperBound { site, radius } => {
            let (st, sj) = ctx.shear.to_strip(site)?;
            if sj < 0 || site.norm_inf() < *radius {
                return Ok(false);
            }
            let seed_strip = ctx.seed_to_strip(witness)?;
            let escape_budget = ClosureBudget {
                escape_radius: Some(*radius),
                allow_repetition: false,
                ..budget.clone()
            };
            let mut run = StripRun::new(ctx.rules(), ctx.shear(), &seed_strip, &escape_budget);
            loop {
                run.fixpoint();
                if run.member(st, sj) {
                    return Ok(true);
                }
                if run.escaped.is_some() {
                    // Escaped somewhere else beyond the radius: equally valid.
                    return Ok(true);
                }
                if run.steps >= escape_budget.step_budget {
                    return Ok(false);
                }
                let (old_lo, old_hi) = run.win;
                let width = old_hi - old_lo;
                if width >= 2 * escape_budget.window_half_width {
                    return Ok(false);
                }
                run.win = (old_lo - width, old_hi + width);
                run.reseed_side(old_lo, true);
                run.reseed_side(old_hi, false);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::named_family;

    fn p(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    fn d(x: i64, y: i64) -> Direction {
        Direction::new(x, y).unwrap()
    }

    #[test]
    fn shear_roundtrip() {
        for (ux, uy) in [(0, 1), (1, 0), (1, 2), (-3, 2), (2, -5)] {
            let map = ShearMap::new(&d(ux, uy));
            for t in -5..=5 {
                for j in 0..=4 {
                    let z = map.to_lattice(t, j).unwrap();
                    assert_eq!(map.to_strip(&z).unwrap(), (t, j));
                }
            }
        }
    }

    #[test]
    fn empty_seed_certifies_finite() {
        let toy = named_family("toy", None).unwrap();
        let out = half_plane_closure(&toy, &d(0, 1), &[], &ClosureBudget::default()).unwrap();
        assert_eq!(out.status, ClosureStatus::CertifiedFinite);
        assert!(out.outside_sites().is_empty());
    }

    #[test]
    fn toy_right_direction_single_site_percolates() {
        let toy = named_family("toy", None).unwrap();
        let out = half_plane_closure(&toy, &d(1, 0), &[p(0, 0)], &ClosureBudget::default()).unwrap();
        assert_eq!(out.status, ClosureStatus::CertifiedInfinite);
        assert!(matches!(
            out.certificate,
            Some(GrowthCertificate::TranslateRepetition { .. })
        ));
    }

    #[test]
    fn toy_top_direction_single_site_is_inert() {
        let toy = named_family("toy", None).unwrap();
        let out = half_plane_closure(&toy, &d(0, 1), &[p(0, 0)], &ClosureBudget::default()).unwrap();
        assert_eq!(out.status, ClosureStatus::CertifiedFinite);
        assert_eq!(out.outside_sites(), &[p(0, 0)]);
    }

    #[test]
    fn toy_top_direction_pair_percolates_and_replays() {
        let toy = named_family("toy", None).unwrap();
        let u = d(0, 1);
        let witness = [p(0, 0), p(1, 0)];
        let out = half_plane_closure(&toy, &u, &witness, &ClosureBudget::default()).unwrap();
        assert_eq!(out.status, ClosureStatus::CertifiedInfinite);
        let cert = out.certificate.expect("certificate");
        assert!(replay_certificate(&toy, &u, &witness, &cert, &ClosureBudget::default()).unwrap());
    }

    #[test]
    fn seed_in_half_plane_rejected() {
        let toy = named_family("toy", None).unwrap();
        let err =
            half_plane_closure(&toy, &d(0, 1), &[p(0, -1)], &ClosureBudget::default()).unwrap_err();
        assert_eq!(err, DynamicsError::SeedInHalfPlane(p(0, -1)));
    }

    #[test]
    fn unstable_direction_rejected() {
        let toy = named_family("toy", None).unwrap();
        let err = HalfPlaneContext::new(&toy, &d(1, 1)).unwrap_err();
        assert_eq!(err, DynamicsError::Unstable(d(1, 1)));
        // (-1,0) is stable but interior to a stable arc, not isolated.
        let err = HalfPlaneContext::new(&toy, &d(-1, -1)).unwrap_err();
        assert_eq!(err, DynamicsError::NotIsolatedStable(d(-1, -1)));
    }

    #[test]
    fn growth_confined_to_seed_rows() {
        let toy = named_family("toy", None).unwrap();
        let u = d(0, 1);
        let out =
            half_plane_closure(&toy, &u, &[p(0, 1), p(1, 1), p(5, 0)], &ClosureBudget::default())
                .unwrap();
        for z in out.outside_sites() {
            assert!(dot(z, &u.as_point()) <= 1);
            assert!(dot(z, &u.as_point()) >= 0);
        }
    }

    #[test]
    fn modified_two_neighbour_line_fills_from_one_site() {
        let f = named_family("modified_two_neighbour", None).unwrap();
        for u in [d(0, 1), d(1, 0), d(0, -1), d(-1, 0)] {
            let out = half_plane_closure(&f, &u, &[LatticePoint::ORIGIN], &ClosureBudget::default())
                .unwrap();
            assert_eq!(out.status, ClosureStatus::CertifiedInfinite, "direction {u}");
        }
    }

    #[test]
    fn bogus_certificate_fails_replay() {
        let toy = named_family("toy", None).unwrap();
        let u = d(0, 1);
        let cert = GrowthCertificate::TranslateRepetition {
            block: vec![p(0, 0)],
            offset: p(1, 0),
            replay_steps: 1,
        };
        assert!(!replay_certificate(&toy, &u, &[p(0, 0)], &cert, &ClosureBudget::default()).unwrap());
    }
}
