//! Configuration-space axes: uniformly sampled continuous coordinates and
//! finite label sets.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Boundary treatment of a continuous axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// The axis wraps: node i = min + i*h with h = (max-min)/points.
    Periodic,
    /// Endpoints are nodes: node i = min + i*h with h = (max-min)/(points-1).
    Clamped,
}

/// What kind of coordinate an axis carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AxisKind {
    Continuous {
        min: f64,
        max: f64,
        points: usize,
        boundary: Boundary,
    },
    Discrete {
        labels: Vec<String>,
    },
}

/// One axis of a configuration space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: AxisKind,
}

impl AxisSpec {
    pub fn continuous(
        name: &str,
        min: f64,
        max: f64,
        points: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        let axis = AxisSpec {
            name: name.to_string(),
            kind: AxisKind::Continuous {
                min,
                max,
                points,
                boundary,
            },
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn discrete(name: &str, labels: &[&str]) -> Result<Self> {
        let axis = AxisSpec {
            name: name.to_string(),
            kind: AxisKind::Discrete {
                labels: labels.iter().map(|s| s.to_string()).collect(),
            },
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(CoreError::InvalidAxis {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if self.name.is_empty() {
            return fail("empty name");
        }
        match &self.kind {
            AxisKind::Continuous {
                min, max, points, ..
            } => {
                if *points < 8 {
                    return fail("continuous axes need at least 8 points");
                }
                if !(max > min) || !min.is_finite() || !max.is_finite() {
                    return fail("requires finite max > min");
                }
                let h = self.spacing().unwrap();
                if !(h > 0.0) {
                    return fail("spacing must be strictly positive");
                }
            }
            AxisKind::Discrete { labels } => {
                if labels.is_empty() {
                    return fail("discrete axes need at least one label");
                }
                for (i, a) in labels.iter().enumerate() {
                    if labels[..i].contains(a) {
                        return fail(&format!("duplicate label `{a}`"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            AxisKind::Continuous { points, .. } => *points,
            AxisKind::Discrete { labels } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, AxisKind::Continuous { .. })
    }

    /// Node spacing; `None` for discrete axes.
    pub fn spacing(&self) -> Option<f64> {
        match &self.kind {
            AxisKind::Continuous {
                min,
                max,
                points,
                boundary,
            } => Some(match boundary {
                Boundary::Periodic => (max - min) / *points as f64,
                Boundary::Clamped => (max - min) / (*points as f64 - 1.0),
            }),
            AxisKind::Discrete { .. } => None,
        }
    }

    pub fn boundary(&self) -> Option<Boundary> {
        match &self.kind {
            AxisKind::Continuous { boundary, .. } => Some(*boundary),
            AxisKind::Discrete { .. } => None,
        }
    }

    /// Coordinate of node `i` (continuous axes) or `i as f64` (discrete).
    pub fn coord(&self, i: usize) -> f64 {
        match &self.kind {
            AxisKind::Continuous { min, .. } => min + i as f64 * self.spacing().unwrap(),
            AxisKind::Discrete { .. } => i as f64,
        }
    }

    /// Quadrature weight of node `i` along this axis. Discrete axes sum
    /// plainly; periodic axes weight every node by the spacing; clamped axes
    /// use trapezoidal end weights so that constants integrate exactly.
    pub fn weight(&self, i: usize) -> f64 {
        match &self.kind {
            AxisKind::Continuous {
                points, boundary, ..
            } => {
                let h = self.spacing().unwrap();
                match boundary {
                    Boundary::Periodic => h,
                    Boundary::Clamped => {
                        if i == 0 || i + 1 == *points {
                            0.5 * h
                        } else {
                            h
                        }
                    }
                }
            }
            AxisKind::Discrete { .. } => 1.0,
        }
    }

    /// Number of faces between adjacent nodes (including the wrap face on
    /// periodic axes).
    pub fn face_count(&self) -> usize {
        match self.boundary() {
            Some(Boundary::Periodic) => self.len(),
            Some(Boundary::Clamped) => self.len() - 1,
            None => 0,
        }
    }
}
