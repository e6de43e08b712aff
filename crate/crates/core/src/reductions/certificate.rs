use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::scalar::{Scalar, Surd};
use crate::spin::{Enumerator, FieldedGraph, SpinParams};

/// Largest relative gap accepted between the two sides of a float identity.
pub const FLOAT_IDENTITY_TOLERANCE: f64 = 1e-9;

/// Relative slack for float field-bound checks such as `field <= 1`.
const FLOAT_BOUND_SLACK: f64 = 1e-12;

/// Number types a reduction identity can be checked in.
pub trait Verifiable: Scalar + fmt::Display {
    /// Whether `lhs` and `rhs` agree, and their relative gap.
    fn agrees(lhs: &Self, rhs: &Self) -> (bool, f64);

    /// `self <= bound`, up to rounding for floats.
    fn at_most(&self, bound: &Self) -> bool;

    /// Exact text of the value when it is not a plain float.
    fn exact_text(&self) -> Option<String>;
}

fn relative_gap(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

impl Verifiable for f64 {
    fn agrees(lhs: &f64, rhs: &f64) -> (bool, f64) {
        let gap = relative_gap(*lhs, *rhs);
        (gap <= FLOAT_IDENTITY_TOLERANCE, gap)
    }

    fn at_most(&self, bound: &f64) -> bool {
        *self <= bound * (1.0 + FLOAT_BOUND_SLACK)
    }

    fn exact_text(&self) -> Option<String> {
        None
    }
}

impl Verifiable for Surd {
    fn agrees(lhs: &Surd, rhs: &Surd) -> (bool, f64) {
        let exact = lhs.check().is_ok() && rhs.check().is_ok() && lhs == rhs;
        let gap = relative_gap(lhs.to_f64(), rhs.to_f64());
        (exact, if exact { 0.0 } else { gap })
    }

    fn at_most(&self, bound: &Surd) -> bool {
        self <= bound
    }

    fn exact_text(&self) -> Option<String> {
        Some(self.to_string())
    }
}

/// Which side of the identity carries the scale factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `Z_out = scale * Z_in`.
    OutputIsScaledInput,
    /// `Z_in = scale * Z_out`.
    InputIsScaledOutput,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verification {
    NotChecked,
    Passed { relative_error: f64 },
    Failed { relative_error: f64 },
}

impl Verification {
    pub fn passed(&self) -> bool {
        matches!(self, Verification::Passed { .. })
    }
}

/// A graph together with the parameters it is evaluated under.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<W = f64> {
    pub graph: FieldedGraph<W>,
    pub params: SpinParams<W>,
}

impl<W: Scalar> Instance<W> {
    pub fn to_float(&self) -> Instance<f64> {
        Instance {
            graph: self.graph.map_fields(W::to_f64),
            params: SpinParams {
                beta: self.params.beta.to_f64(),
                gamma: self.params.gamma.to_f64(),
                mu: self.params.mu.to_f64(),
            },
        }
    }
}

/// Two instances whose partition functions differ by an explicit factor.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionCertificate<W = f64> {
    pub input: Instance<W>,
    pub output: Instance<W>,
    pub scale: W,
    pub orientation: Orientation,
    pub verification: Verification,
}

impl<W: Verifiable> ReductionCertificate<W> {
    pub fn new(input: Instance<W>, output: Instance<W>, scale: W, orientation: Orientation) -> Self {
        ReductionCertificate {
            input,
            output,
            scale,
            orientation,
            verification: Verification::NotChecked,
        }
    }

    /// `(unscaled side, scale * other side)` from the two partition functions.
    fn sides(&self, z_in: W, z_out: W) -> (W, W) {
        match self.orientation {
            Orientation::OutputIsScaledInput => (z_out, self.scale.clone() * z_in),
            Orientation::InputIsScaledOutput => (z_in, self.scale.clone() * z_out),
        }
    }

    /// Evaluates both partition functions and records whether the identity holds.
    pub fn verify(mut self, enumerator: &Enumerator) -> Result<Self> {
        let z_in = enumerator.partition_function(&self.input.graph, &self.input.params)?;
        let z_out = enumerator.partition_function(&self.output.graph, &self.output.params)?;
        let (lhs, rhs) = self.sides(z_in, z_out);
        let (ok, relative_error) = W::agrees(&lhs, &rhs);
        self.verification = if ok {
            Verification::Passed { relative_error }
        } else {
            Verification::Failed { relative_error }
        };
        Ok(self)
    }

    /// Chains `self` (input A, output B) with `next` (input B, output C).
    ///
    /// Both must use [`Orientation::InputIsScaledOutput`].
    pub fn then(&self, next: &ReductionCertificate<W>) -> ReductionCertificate<W> {
        debug_assert_eq!(self.orientation, Orientation::InputIsScaledOutput);
        debug_assert_eq!(next.orientation, Orientation::InputIsScaledOutput);
        ReductionCertificate::new(
            self.input.clone(),
            next.output.clone(),
            self.scale.clone() * next.scale.clone(),
            Orientation::InputIsScaledOutput,
        )
    }

    pub fn to_float(&self) -> ReductionCertificate<f64> {
        ReductionCertificate {
            input: self.input.to_float(),
            output: self.output.to_float(),
            scale: self.scale.to_f64(),
            orientation: self.orientation,
            verification: self.verification,
        }
    }
}

/// [`ReductionCertificate::verify`] with the default enumeration limit.
pub fn verify_reduction<W: Verifiable>(cert: ReductionCertificate<W>) -> Result<ReductionCertificate<W>> {
    cert.verify(&Enumerator::default())
}
