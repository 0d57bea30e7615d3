//! Diffeomorphism jets of the plane fixing the origin, and the ones that
//! lift through the model fibration `(u, v) -> u v`.
//!
//! A plane jet `psi` lifts exactly when its Taylor series is divisible by
//! `z` (then `psi = z h(z)` lifts to `(u, v h(uv))`, orientation
//! preserving) or by `zbar` (then `psi = zbar h(z)` lifts through the
//! fiberwise conjugation `(u, v) -> (ubar, vbar)`, orientation
//! reversing).  Divisibility is detected with a relative tolerance on the
//! forbidden pure monomials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet2::Jet2;
use crate::jet4::Jet4;

/// Relative tolerance for "this coefficient is zero" in classification.
pub const LIFT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Preserving,
    Reversing,
}

/// An invertible jet: zero constant term and `|a| != |b|` in the linear
/// part `a z + b zbar`.  The linear coefficients are cached on
/// construction.
#[derive(Clone, Debug)]
pub struct DiffeoJet {
    jet: Jet2,
    a: Complex64,
    b: Complex64,
}

impl DiffeoJet {
    pub fn new(jet: Jet2) -> Result<Self> {
        let c0 = jet.constant_term();
        if c0.norm() > 1e-9 * jet.sup_norm().max(1.0) {
            return Err(Error::NonzeroConstantTerm { value: c0 });
        }
        let mut jet = jet;
        jet.set(0, 0, Complex64::ZERO);
        let (a, b) = jet.linear_part();
        if (a.norm() - b.norm()).abs() <= 1e-9 * a.norm().max(b.norm()).max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateLinearPart { a, b });
        }
        Ok(DiffeoJet { jet, a, b })
    }

    pub fn identity(order: usize) -> Result<Self> {
        DiffeoJet::new(Jet2::variable(order)?)
    }

    /// The conjugation `z -> zbar` as a jet.
    pub fn conjugation(order: usize) -> Result<Self> {
        DiffeoJet::new(Jet2::variable_bar(order)?)
    }

    pub fn jet(&self) -> &Jet2 {
        &self.jet
    }

    pub fn order(&self) -> usize {
        self.jet.order()
    }

    pub fn linear(&self) -> (Complex64, Complex64) {
        (self.a, self.b)
    }

    /// Sign of `|a|^2 - |b|^2`, i.e. of the Jacobian at the origin.
    pub fn orientation(&self) -> Orientation {
        if self.a.norm() > self.b.norm() {
            Orientation::Preserving
        } else {
            Orientation::Reversing
        }
    }

    pub fn compose(&self, inner: &DiffeoJet) -> Result<DiffeoJet> {
        DiffeoJet::new(self.jet.compose(inner.jet())?)
    }

    pub fn inverse(&self) -> Result<DiffeoJet> {
        DiffeoJet::new(self.jet.invert()?)
    }
}

/// Divisibility class of a diffeo jet with respect to the fibration.
///
/// `ambiguous` flags inputs matching both divisibility patterns; for an
/// invertible jet this cannot happen (one of the two linear monomials is
/// always present), but the flag keeps the classifier total on the raw
/// pattern level.
#[derive(Clone, Debug)]
pub enum LiftClass {
    DivisibleByZ { cofactor: Jet2, ambiguous: bool },
    DivisibleByZbar { cofactor: Jet2 },
    NotLiftable,
}

impl LiftClass {
    pub fn is_liftable(&self) -> bool {
        !matches!(self, LiftClass::NotLiftable)
    }

    pub fn orientation(&self) -> Option<Orientation> {
        match self {
            LiftClass::DivisibleByZ { .. } => Some(Orientation::Preserving),
            LiftClass::DivisibleByZbar { .. } => Some(Orientation::Reversing),
            LiftClass::NotLiftable => None,
        }
    }
}

/// Classify a diffeo jet by divisibility, with the default tolerance.
pub fn classify_liftable(psi: &DiffeoJet) -> LiftClass {
    classify_liftable_tol(psi, LIFT_TOL)
}

/// Classify with an explicit relative tolerance: a coefficient counts as
/// zero when its magnitude is below `tol` times the largest coefficient.
pub fn classify_liftable_tol(psi: &DiffeoJet, tol: f64) -> LiftClass {
    let jet = psi.jet();
    let k = jet.order();
    let cut = tol * jet.sup_norm();
    // z-divisible: no pure zbar^q monomials. zbar-divisible: no pure z^p.
    let mut div_z = true;
    let mut div_zbar = true;
    for d in 1..=k {
        if jet.coeff(0, d).norm() > cut {
            div_z = false;
        }
        if jet.coeff(d, 0).norm() > cut {
            div_zbar = false;
        }
    }
    match (div_z, div_zbar) {
        (true, both) => LiftClass::DivisibleByZ {
            cofactor: shift_out_z(jet),
            ambiguous: both,
        },
        (false, true) => LiftClass::DivisibleByZbar { cofactor: shift_out_zbar(jet) },
        (false, false) => LiftClass::NotLiftable,
    }
}

/// `h` with `psi = z h`, one order lower; `h(0)` is the coefficient of
/// `z` in `psi`.
fn shift_out_z(jet: &Jet2) -> Jet2 {
    let k = jet.order();
    let mut h = Jet2::zero(k - 1).expect("order reduced below cap");
    for (p, q, c) in jet.iter() {
        if p >= 1 {
            h.set(p - 1, q, c);
        }
    }
    h
}

fn shift_out_zbar(jet: &Jet2) -> Jet2 {
    let k = jet.order();
    let mut h = Jet2::zero(k - 1).expect("order reduced below cap");
    for (p, q, c) in jet.iter() {
        if q >= 1 {
            h.set(p, q - 1, c);
        }
    }
    h
}

/// A fiber-preserving transformation of the model space written as the
/// pair of its coordinate components `(Psi_u, Psi_v)`.
#[derive(Clone, Debug)]
pub struct ModelLift {
    pub comp_u: Jet4,
    pub comp_v: Jet4,
}

/// Lift a liftable jet to the model space, doubling the order.
///
/// For `psi = z h(z)` the lift is `(u, v h(uv))`; for `psi = zbar h(z)`
/// it is the previous construction pre-composed with the conjugation
/// lift `(u, v) -> (ubar, vbar)`, which lands on `(ubar, vbar s)` with
/// `s` the substitution of `h` in the base coordinate `uv`.
pub fn lift_to_model(psi: &DiffeoJet) -> Result<ModelLift> {
    let order = 2 * psi.order();
    match classify_liftable(psi) {
        LiftClass::DivisibleByZ { cofactor, .. } => {
            let h = cofactor.substitute_uv();
            let h = pad_order(&h, order);
            Ok(ModelLift {
                comp_u: Jet4::var_u(order),
                comp_v: h.mul_monomial([0, 0, 1, 0], Complex64::ONE),
            })
        }
        LiftClass::DivisibleByZbar { cofactor } => {
            let h = cofactor.substitute_uv();
            let h = pad_order(&h, order);
            Ok(ModelLift {
                comp_u: Jet4::var_ubar(order),
                comp_v: h.mul_monomial([0, 0, 0, 1], Complex64::ONE),
            })
        }
        LiftClass::NotLiftable => Err(Error::NotLiftable),
    }
}

fn pad_order(j: &Jet4, order: usize) -> Jet4 {
    let mut out = Jet4::zero(order);
    for (e, v) in j.terms() {
        out.add_to(e, v);
    }
    out
}

/// Sup-norm of `Psi_u Psi_v - psi(uv)` over all monomials up to twice
/// the base order: how far the candidate pair is from actually covering
/// `psi` through the fibration.
pub fn verify_lift(psi: &Jet2, lift: &ModelLift) -> f64 {
    let product = &lift.comp_u * &lift.comp_v;
    let target = pad_order(&psi.substitute_uv(), product.order());
    product.sup_distance(&target)
}
