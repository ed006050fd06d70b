//! Inlet (displacement-chamber) pressure as a function of shaft angle.
//!
//! The chamber pressure of a real unit alternates between the discharge and
//! suction levels once per revolution. Measured traces are machine-specific,
//! so the solver takes a configurable periodic law; the trapezoid below is the
//! default stand-in.

use crate::error::{CoreError, Result};

/// Periodic inlet-pressure law, evaluated per shaft angle.
#[derive(Debug, Clone, PartialEq)]
pub enum InletWaveform {
    Constant {
        pressure: f64,
    },
    /// Trapezoid over one revolution, in cycle fraction u = (φ/2π + phase) mod 1:
    /// rise on [0, ramp), high plateau on [ramp, duty), fall on
    /// [duty, duty + ramp), low plateau on [duty + ramp, 1).
    Trapezoid {
        low: f64,
        high: f64,
        /// End of the high plateau as a cycle fraction.
        duty: f64,
        /// Width of each ramp as a cycle fraction.
        ramp: f64,
        /// Cycle-fraction offset added to φ/2π.
        phase: f64,
    },
    /// Piecewise-linear periodic interpolation of (cycle fraction, Pa) points.
    Table { points: Vec<(f64, f64)> },
}

impl Default for InletWaveform {
    /// Trapezoid between 0.5 and 10 MPa, high for half the revolution, with
    /// 5% ramps, locked to the shaft angle (high phase starts at φ = 0).
    fn default() -> Self {
        Self::Trapezoid {
            low: 0.5e6,
            high: 10.0e6,
            duty: 0.5,
            ramp: 0.05,
            phase: 0.0,
        }
    }
}

impl InletWaveform {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, value: f64, ok: bool, constraint: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(CoreError::InvalidParameter { name, value, constraint })
            }
        };
        match self {
            Self::Constant { pressure } => check(
                "waveform pressure",
                *pressure,
                pressure.is_finite() && *pressure >= 0.0,
                "must be finite and non-negative",
            ),
            Self::Trapezoid { low, high, duty, ramp, phase } => {
                check(
                    "waveform low",
                    *low,
                    low.is_finite() && *low >= 0.0,
                    "must be finite and non-negative",
                )?;
                check("waveform high", *high, high.is_finite() && *high >= *low, "must be >= low")?;
                check("waveform ramp", *ramp, *ramp >= 0.0 && *ramp < 0.5, "must lie in [0, 0.5)")?;
                check(
                    "waveform duty",
                    *duty,
                    *duty >= *ramp && *duty + *ramp <= 1.0,
                    "must satisfy ramp <= duty <= 1 - ramp",
                )?;
                check("waveform phase", *phase, phase.is_finite(), "must be finite")
            }
            Self::Table { points } => {
                if points.is_empty() {
                    return Err(CoreError::InvalidParameter {
                        name: "waveform points",
                        value: 0.0,
                        constraint: "table needs at least one point",
                    });
                }
                let mut prev = -1.0;
                for &(u, p) in points {
                    check(
                        "waveform table fraction",
                        u,
                        (0.0..1.0).contains(&u) && u > prev,
                        "fractions must be strictly increasing within [0, 1)",
                    )?;
                    check(
                        "waveform table pressure",
                        p,
                        p.is_finite() && p >= 0.0,
                        "must be finite and non-negative",
                    )?;
                    prev = u;
                }
                Ok(())
            }
        }
    }

    /// Pressure (Pa) at shaft angle φ (rad, any winding).
    pub fn pressure_at(&self, shaft_angle: f64) -> f64 {
        match self {
            Self::Constant { pressure } => *pressure,
            Self::Trapezoid { low, high, duty, ramp, phase } => {
                let u = (shaft_angle / (2.0 * std::f64::consts::PI) + phase).rem_euclid(1.0);
                if u < *ramp {
                    low + (high - low) * u / ramp
                } else if u < *duty {
                    *high
                } else if u < duty + ramp {
                    high - (high - low) * (u - duty) / ramp
                } else {
                    *low
                }
            }
            Self::Table { points } => {
                let u = (shaft_angle / (2.0 * std::f64::consts::PI)).rem_euclid(1.0);
                // Locate the segment [u_k, u_{k+1}) containing u, wrapping the
                // last point around to the first.
                let last = points.len() - 1;
                let (u0, p0, u1, p1) = if u < points[0].0 || u >= points[last].0 {
                    let (ua, pa) = points[last];
                    let (ub, pb) = points[0];
                    // Distance computed modulo one revolution.
                    let span = (ub + 1.0) - ua;
                    let t = (u + if u < ua { 1.0 } else { 0.0 }) - ua;
                    return if span == 0.0 { pa } else { pa + (pb - pa) * (t / span) };
                } else {
                    let k = points.partition_point(|&(uk, _)| uk <= u) - 1;
                    (points[k].0, points[k].1, points[k + 1].0, points[k + 1].1)
                };
                p0 + (p1 - p0) * ((u - u0) / (u1 - u0))
            }
        }
    }
}
