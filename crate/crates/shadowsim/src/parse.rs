//! Small text parsers shared by the CLI: grid specs, potentials, angle lists.
//!
//! All parsers are total — they return errors, never panic — so they can be
//! driven directly by fuzzing.

use serde::Serialize;

/// Half-open uniform grid `start:stop:count`: the values
/// `start + k·(stop−start)/count` for `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Potential for the sliced propagator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PotentialSpec {
    Free,
    Harmonic { omega: f64 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("{what}: expected {expected}, got {got:?}")]
    Malformed { what: &'static str, expected: &'static str, got: String },
    #[error("{what}: field {field} has invalid value {value:?}")]
    Field { what: &'static str, field: &'static str, value: String },
}

impl GridSpec {
    /// Parses `start:stop:count`. `count` must be at least 1 and small enough
    /// to enumerate; start and stop must be finite.
    pub fn parse(s: &str) -> Result<GridSpec, SpecError> {
        const WHAT: &str = "grid spec";
        let mut parts = s.split(':');
        let (Some(a), Some(b), Some(c), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(SpecError::Malformed {
                what: WHAT,
                expected: "start:stop:count",
                got: s.to_string(),
            });
        };
        let field = |field: &'static str, value: &str| SpecError::Field {
            what: WHAT,
            field,
            value: value.to_string(),
        };
        let start: f64 = a.parse().map_err(|_| field("start", a))?;
        let stop: f64 = b.parse().map_err(|_| field("stop", b))?;
        if !start.is_finite() {
            return Err(field("start", a));
        }
        if !stop.is_finite() {
            return Err(field("stop", b));
        }
        let count: usize = c.parse().map_err(|_| field("count", c))?;
        if count == 0 || count > 100_000_000 {
            return Err(field("count", c));
        }
        // The span itself must be representable or the step overflows.
        if !(stop - start).is_finite() {
            return Err(field("stop", b));
        }
        Ok(GridSpec { start, stop, count })
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / self.count as f64
    }

    /// The grid values, half-open: `stop` itself is excluded.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let step = self.step();
        (0..self.count).map(move |k| self.start + k as f64 * step)
    }
}

impl PotentialSpec {
    /// Parses `free` or `harmonic:<omega>`.
    pub fn parse(s: &str) -> Result<PotentialSpec, SpecError> {
        const WHAT: &str = "potential spec";
        match s.split_once(':') {
            None if s == "free" => Ok(PotentialSpec::Free),
            Some(("harmonic", rest)) => {
                let omega: f64 = rest.parse().map_err(|_| SpecError::Field {
                    what: WHAT,
                    field: "omega",
                    value: rest.to_string(),
                })?;
                if !omega.is_finite() || omega <= 0.0 {
                    return Err(SpecError::Field {
                        what: WHAT,
                        field: "omega",
                        value: rest.to_string(),
                    });
                }
                Ok(PotentialSpec::Harmonic { omega })
            }
            _ => Err(SpecError::Malformed {
                what: WHAT,
                expected: "free | harmonic:<omega>",
                got: s.to_string(),
            }),
        }
    }
}

/// Parses a comma-separated CHSH angle quadruple `α1,α2,β1,β2` (radians).
pub fn parse_angles4(s: &str) -> Result<[f64; 4], SpecError> {
    const WHAT: &str = "angles";
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(SpecError::Malformed {
            what: WHAT,
            expected: "alpha1,alpha2,beta1,beta2",
            got: s.to_string(),
        });
    }
    let mut out = [0.0; 4];
    for (slot, raw) in out.iter_mut().zip(&parts) {
        let v: f64 = raw.parse().map_err(|_| SpecError::Field {
            what: WHAT,
            field: "angle",
            value: raw.to_string(),
        })?;
        if !v.is_finite() {
            return Err(SpecError::Field { what: WHAT, field: "angle", value: raw.to_string() });
        }
        *slot = v;
    }
    Ok(out)
}
