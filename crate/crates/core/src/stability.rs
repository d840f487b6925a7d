//! Stable-direction computation and classification of update families into
//! the supercritical / critical / subcritical universality classes.

use crate::family::UpdateFamily;
use crate::geometry::{unstable_arc, Arc, ArcSet, Direction, Side};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StabilityError {
    #[error("operation requires a critical family, got {0:?}")]
    NotCritical(Classification),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Supercritical,
    Critical,
    Subcritical,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Supercritical => write!(f, "Supercritical"),
            Classification::Critical => write!(f, "Critical"),
            Classification::Subcritical => write!(f, "Subcritical"),
        }
    }
}

/// The full stability picture of a family: the open set of unstable
/// directions, its closed complement, the isolated stable directions and the
/// universality class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityProfile {
    unstable: ArcSet,
    stable: ArcSet,
    isolated: Vec<Direction>,
    classification: Classification,
}

impl StabilityProfile {
    pub fn unstable(&self) -> &ArcSet {
        &self.unstable
    }

    pub fn stable(&self) -> &ArcSet {
        &self.stable
    }

    /// Isolated stable directions in counterclockwise order.
    pub fn isolated(&self) -> &[Direction] {
        &self.isolated
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn is_unstable(&self, u: &Direction) -> bool {
        self.unstable.contains(u)
    }

    pub fn is_stable(&self, u: &Direction) -> bool {
        self.stable.contains(u)
    }

    pub fn is_isolated_stable(&self, u: &Direction) -> bool {
        self.isolated.contains(u)
    }

    /// The union of stable components of positive angular length.
    pub fn non_isolated_stable(&self) -> ArcSet {
        self.stable.positive_length_part()
    }
}

/// Computes the stability profile of a validated family.
///
/// The unstable set is the union of the per-rule unstable arcs; the stable
/// set is its complement, whose endpoints are among the (at most 2 per rule)
/// arc endpoints.
pub fn stability_profile(family: &UpdateFamily) -> StabilityProfile {
    let arcs: Vec<Arc> = family
        .rules()
        .iter()
        .map(|r| unstable_arc(r.sites()).expect("validated rules are nonempty and avoid the origin"))
        .collect();
    let unstable = ArcSet::from_arcs(arcs.iter());
    let stable = unstable.complement();
    let isolated = stable.isolated_points();
    let classification = classify_profile(&unstable, &stable);
    StabilityProfile { unstable, stable, isolated, classification }
}

fn classify_profile(unstable: &ArcSet, stable: &ArcSet) -> Classification {
    // Supercritical: some open semicircle is entirely unstable, i.e. some
    // maximal unstable component has angular length at least pi.
    if unstable.has_component_spanning_half() {
        return Classification::Supercritical;
    }
    // Critical: some open semicircle meets the stable set only in isolated
    // points, i.e. avoids every stable component of positive length.
    let thick = stable.positive_length_part();
    if thick.is_empty() || thick.complement().has_component_spanning_half() {
        return Classification::Critical;
    }
    Classification::Subcritical
}

/// Classifies a family without materializing the profile.
pub fn classify(family: &UpdateFamily) -> Classification {
    stability_profile(family).classification()
}

/// The finite list of open semicircles sufficient for evaluating the family
/// difficulty of a critical family: semicircles anchored at stable-set
/// boundary directions (and their antipodes), filtered to those containing no
/// stable direction of a positive-length component.
pub fn critical_semicircle_candidates(
    profile: &StabilityProfile,
) -> Result<Vec<Arc>, StabilityError> {
    if profile.classification != Classification::Critical {
        return Err(StabilityError::NotCritical(profile.classification));
    }
    let mut anchors = profile.stable.boundary_directions();
    anchors.extend(anchors.clone().iter().map(Direction::antipode));
    anchors.sort();
    anchors.dedup();
    let thick = profile.non_isolated_stable();
    let mut out = Vec::new();
    for a in anchors {
        let sc = Arc::semicircle(a, Side::CounterClockwise);
        if ArcSet::from_arc(&sc).intersection(&thick).is_empty() {
            out.push(sc);
        }
    }
    Ok(out)
}
