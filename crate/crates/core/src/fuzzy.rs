//! Fuzzified property values to a desired walking speed.
//!
//! A property value is located in its membership class and given two
//! degrees: `upv` for the class holding the value and `lov` for the class
//! just below it. The degrees weight the endpoints of the class speed band
//! (`minisrd`, `maxisrd`), with the weighting mirrored on either side of the
//! class midpoint. The desired speed is the mean of all property weights
//! scaled by the gender and emergency factors and clamped to `[2, 7]` km/h.

use thiserror::Error;

use crate::domain::{
    MembershipClass, PersonProfile, PropertyKind, PropertySpec, SPEED_MAX_KMH, SPEED_MIN_KMH,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("{property} value {value} is outside [{lo}, {hi}]")]
    OutOfDomain {
        property: PropertyKind,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("class `{0}` is not registered")]
    UnregisteredClass(String),
    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("membership degrees sum to zero")]
    ZeroWeight,
    #[error("{0} weights for {1} speed degrees")]
    LengthMismatch(usize, usize),
    #[error("no property weights")]
    Empty,
    #[error("{name} must be positive, got {value}")]
    InvalidFactor { name: &'static str, value: f64 },
}

/// Degrees of a crisp value in its class and the class sharing the crossover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fuzzification<'a> {
    pub primary_class: &'a MembershipClass,
    pub secondary_class: &'a MembershipClass,
    /// Degree of the primary class.
    pub upv: f64,
    /// Degree of the secondary class.
    pub lov: f64,
}

/// Linear crossover over the class interval: `upv` rises from 0 at `lo` to 1
/// at `hi`, `lov = 1 - upv`. The secondary class is the one below; the first
/// class has none and pairs with itself.
pub fn fuzzify(value: f64, spec: &PropertySpec) -> Result<Fuzzification<'_>, FuzzyError> {
    let idx = spec.class_index(value).ok_or_else(|| {
        let (lo, hi) = spec.domain();
        FuzzyError::OutOfDomain {
            property: spec.property,
            value,
            lo,
            hi,
        }
    })?;
    let classes = spec.classes();
    let primary = &classes[idx];
    let secondary = if idx > 0 { &classes[idx - 1] } else { primary };
    let upv = ((value - primary.lo) / (primary.hi - primary.lo)).clamp(0.0, 1.0);
    Ok(Fuzzification {
        primary_class: primary,
        secondary_class: secondary,
        upv,
        lov: 1.0 - upv,
    })
}

/// Speed sub-range `(minisrd, maxisrd)` of a class registered in `spec`.
pub fn class_speed_range(spec: &PropertySpec, class: &str) -> Result<(f64, f64), FuzzyError> {
    spec.class(class)
        .map(|c| (c.minisrd, c.maxisrd))
        .ok_or_else(|| FuzzyError::UnregisteredClass(class.to_string()))
}

pub fn midvalue(lo: f64, hi: f64) -> Result<f64, FuzzyError> {
    if !(lo < hi) {
        return Err(FuzzyError::EmptyInterval { lo, hi });
    }
    Ok((lo + hi) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyWeight {
    /// km/h
    pub weightprop: f64,
    pub source_property: PropertyKind,
}

/// Upper-half weighting: `upv` pulls towards `maxisrd`.
pub fn upper_half_weight(lov: f64, upv: f64, minisrd: f64, maxisrd: f64) -> Result<f64, FuzzyError> {
    let total = lov + upv;
    if total == 0.0 {
        return Err(FuzzyError::ZeroWeight);
    }
    Ok((lov * minisrd + upv * maxisrd) / total)
}

/// Lower-half weighting: `lov` pulls towards `maxisrd`.
pub fn lower_half_weight(lov: f64, upv: f64, minisrd: f64, maxisrd: f64) -> Result<f64, FuzzyError> {
    let total = lov + upv;
    if total == 0.0 {
        return Err(FuzzyError::ZeroWeight);
    }
    Ok((upv * minisrd + lov * maxisrd) / total)
}

/// Weight of one property value in km/h, inside the primary class band.
pub fn weight_property(
    value: f64,
    f: &Fuzzification<'_>,
    property: PropertyKind,
) -> Result<PropertyWeight, FuzzyError> {
    let class = f.primary_class;
    let mid = midvalue(class.lo, class.hi)?;
    let weightprop = if value > mid {
        upper_half_weight(f.lov, f.upv, class.minisrd, class.maxisrd)?
    } else {
        lower_half_weight(f.lov, f.upv, class.minisrd, class.maxisrd)?
    };
    Ok(PropertyWeight {
        weightprop,
        source_property: property,
    })
}

/// `Σ wp·srd / Σ wp`.
pub fn weighted_mean(wp: &[f64], srd: &[f64]) -> Result<f64, FuzzyError> {
    if wp.len() != srd.len() {
        return Err(FuzzyError::LengthMismatch(wp.len(), srd.len()));
    }
    if wp.is_empty() {
        return Err(FuzzyError::Empty);
    }
    let total: f64 = wp.iter().sum();
    if !(total > 0.0) {
        return Err(FuzzyError::ZeroWeight);
    }
    Ok(wp.iter().zip(srd).map(|(w, s)| w * s).sum::<f64>() / total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesiredSpeed {
    /// Clamped to `[2, 7]` km/h.
    pub kmh: f64,
    pub unclamped_kmh: f64,
}

pub fn desired_speed(weights: &[PropertyWeight], gen: f64, em: f64) -> Result<DesiredSpeed, FuzzyError> {
    if weights.is_empty() {
        return Err(FuzzyError::Empty);
    }
    for (name, value) in [("gender_factor", gen), ("emergency_factor", em)] {
        if !(value > 0.0) {
            return Err(FuzzyError::InvalidFactor { name, value });
        }
    }
    let mean = weights.iter().map(|w| w.weightprop).sum::<f64>() / weights.len() as f64;
    let unclamped = mean * gen * em;
    Ok(DesiredSpeed {
        kmh: unclamped.clamp(SPEED_MIN_KMH, SPEED_MAX_KMH),
        unclamped_kmh: unclamped,
    })
}

/// The property specs that contribute to an agent's speed.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedModel {
    specs: Vec<PropertySpec>,
}

impl SpeedModel {
    /// Specs are kept in property order; a later spec for the same property
    /// replaces the earlier one.
    pub fn new(specs: Vec<PropertySpec>) -> Self {
        let mut model = SpeedModel { specs: Vec::new() };
        for spec in specs {
            model.set(spec);
        }
        model
    }

    pub fn set(&mut self, spec: PropertySpec) {
        self.specs.retain(|s| s.property != spec.property);
        self.specs.push(spec);
        self.specs.sort_by_key(|s| s.property);
    }

    pub fn specs(&self) -> &[PropertySpec] {
        &self.specs
    }

    pub fn spec(&self, kind: PropertyKind) -> Option<&PropertySpec> {
        self.specs.iter().find(|s| s.property == kind)
    }

    pub fn property_weights(&self, profile: &PersonProfile) -> Result<Vec<PropertyWeight>, FuzzyError> {
        self.specs
            .iter()
            .map(|spec| {
                let value = profile.value(spec.property);
                let f = fuzzify(value, spec)?;
                weight_property(value, &f, spec.property)
            })
            .collect()
    }

    pub fn agent_speed(&self, profile: &PersonProfile) -> Result<DesiredSpeed, FuzzyError> {
        let weights = self.property_weights(profile)?;
        desired_speed(&weights, profile.gender_factor, profile.emergency_factor)
    }
}

impl Default for SpeedModel {
    fn default() -> Self {
        SpeedModel::new(PropertyKind::ALL.into_iter().map(PropertySpec::default_for).collect())
    }
}
