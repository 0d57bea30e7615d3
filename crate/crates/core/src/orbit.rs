//! Gauge orbits of transition-map tuples around a multiply pinched
//! fiber.
//!
//! A fiber with `n` pinch points carries `n` local models; the smooth
//! structure is encoded by the tuple of transition jets
//! `Phi = (phi_{1,2}, ..., phi_{1,n})` between the first base chart and
//! the others, all orientation preserving.  Liftable jets act by
//! `(psi_1, ..., psi_n) . phi_{1,i} = psi_1 o phi_{1,i} o psi_i^{-1}`,
//! and orbits of this action are exactly the smooth-equivalence classes.
//!
//! First-order data: `mu_i = b_i / conj(a_i)` from the linear part
//! `a_i z + b_i zbar` of `phi_{1,i}`.  The residual gauge freedom on the
//! tuple `(mu_2, ..., mu_n)` is a common phase rotation together with
//! simultaneous conjugation, leaving `2n - 3` real invariants.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::germ::{classify_liftable, DiffeoJet, Orientation};
use crate::jet2::{from_xy, monomials, to_xy, Jet2, XyPoly};

/// Below this magnitude a `mu` level counts as zero: the stratum where
/// the normal-form algorithm breaks down and the moduli space fails to
/// be Hausdorff.
pub const MU_ZERO_TOL: f64 = 1e-6;

/// Default relative cutoff on singular values in rank computations.
pub const RANK_REL_TOL: f64 = 1e-8;

/// Default tolerance for comparing `mu` values and canonical tuples.
pub const INVARIANT_TOL: f64 = 1e-9;

/// Transition jets `(phi_{1,2}, ..., phi_{1,n})`; `n = maps.len() + 1`
/// pinch points, all maps orientation preserving and of a common order.
#[derive(Clone, Debug)]
pub struct GluingTuple {
    maps: Vec<DiffeoJet>,
}

impl GluingTuple {
    pub fn new(maps: Vec<DiffeoJet>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::TupleTooSmall);
        }
        let order = maps[0].order();
        for (i, m) in maps.iter().enumerate() {
            if m.order() != order {
                return Err(Error::OrderMismatch { left: order, right: m.order() });
            }
            if m.orientation() != Orientation::Preserving {
                return Err(Error::OrientationReversing { index: i + 2 });
            }
        }
        Ok(GluingTuple { maps })
    }

    /// Number of pinch points `n`.
    pub fn pinches(&self) -> usize {
        self.maps.len() + 1
    }

    pub fn order(&self) -> usize {
        self.maps[0].order()
    }

    pub fn maps(&self) -> &[DiffeoJet] {
        &self.maps
    }
}

/// A gauge element `(psi_1, ..., psi_n)`: liftable jets of one common
/// orientation class and order.
#[derive(Clone, Debug)]
pub struct GaugeTuple {
    psis: Vec<DiffeoJet>,
    orientation: Orientation,
}

impl GaugeTuple {
    pub fn new(psis: Vec<DiffeoJet>) -> Result<Self> {
        if psis.is_empty() {
            return Err(Error::TupleTooSmall);
        }
        let order = psis[0].order();
        let orientation = psis[0].orientation();
        for (i, psi) in psis.iter().enumerate() {
            if psi.order() != order {
                return Err(Error::OrderMismatch { left: order, right: psi.order() });
            }
            if !classify_liftable(psi).is_liftable() {
                return Err(Error::GaugeNotLiftable { slot: i + 1 });
            }
            if psi.orientation() != orientation {
                return Err(Error::MixedOrientation);
            }
        }
        Ok(GaugeTuple { psis, orientation })
    }

    pub fn identity(n: usize, order: usize) -> Result<Self> {
        let id = DiffeoJet::identity(order)?;
        GaugeTuple::new(vec![id; n])
    }

    pub fn len(&self) -> usize {
        self.psis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psis.is_empty()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn psis(&self) -> &[DiffeoJet] {
        &self.psis
    }
}

/// Act on a gluing tuple: component `i` becomes
/// `psi_1 o phi_{1,i} o psi_i^{-1}`.
pub fn gauge_act(eta: &GaugeTuple, tuple: &GluingTuple) -> Result<GluingTuple> {
    if eta.len() != tuple.pinches() {
        return Err(Error::SizeMismatch { gauge: eta.len(), expected: tuple.pinches() });
    }
    if eta.psis[0].order() != tuple.order() {
        return Err(Error::OrderMismatch {
            left: eta.psis[0].order(),
            right: tuple.order(),
        });
    }
    let psi1 = &eta.psis[0];
    let mut out = Vec::with_capacity(tuple.maps.len());
    for (i, phi) in tuple.maps.iter().enumerate() {
        let inv = eta.psis[i + 1].inverse()?;
        out.push(psi1.compose(&phi.compose(&inv)?)?);
    }
    GluingTuple::new(out)
}

/// The tuple `(mu_2, ..., mu_n)` with `mu_i = b_i / conj(a_i)`; always
/// `|mu_i| < 1` for orientation-preserving maps.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderInvariant {
    pub mus: Vec<Complex64>,
    pub canonical: bool,
}

pub fn first_order_invariants(tuple: &GluingTuple) -> FirstOrderInvariant {
    let mus = tuple
        .maps
        .iter()
        .map(|m| {
            let (a, b) = m.linear();
            b / a.conj()
        })
        .collect();
    FirstOrderInvariant { mus, canonical: false }
}

/// The double-pinch modulus `mu = |b / a|` of a single transition jet.
pub fn mu_double(phi: &DiffeoJet) -> f64 {
    let (a, b) = phi.linear();
    b.norm() / a.norm()
}

/// Reduce an invariant tuple modulo the residual gauge freedom: a common
/// rotation `(mu_i) -> (e^{i theta} mu_i)` and simultaneous conjugation.
///
/// The representative rotates the first `mu_j` with `|mu_j| > tol` to the
/// positive real axis, then picks the lexicographically smaller of the
/// tuple and its conjugate on the interleaved `(Re, Im)` vector, treating
/// coordinates within `tol` as ties.
pub fn canonicalize_invariant(inv: &FirstOrderInvariant, tol: f64) -> FirstOrderInvariant {
    let anchor = inv.mus.iter().position(|m| m.norm() > tol);
    let rotated: Vec<Complex64> = match anchor {
        None => inv.mus.clone(),
        Some(i) => {
            let phase = (-Complex64::i() * inv.mus[i].arg()).exp();
            let mut out: Vec<Complex64> = inv.mus.iter().map(|x| x * phase).collect();
            // The anchor lands on the positive real axis by definition
            // of the representative; store it exactly there instead of
            // keeping the rounding dust of the rotation.
            out[i] = Complex64::new(inv.mus[i].norm(), 0.0);
            out
        }
    };
    let conjugated: Vec<Complex64> = rotated.iter().map(|m| m.conj()).collect();
    let pick_conj = {
        let mut decision = false;
        for (a, b) in rotated.iter().zip(&conjugated) {
            for (x, y) in [(a.re, b.re), (a.im, b.im)] {
                if (x - y).abs() <= tol {
                    continue;
                }
                decision = y < x;
                break;
            }
            let tied = (a.re - b.re).abs() <= tol && (a.im - b.im).abs() <= tol;
            if !tied {
                break;
            }
        }
        decision
    };
    FirstOrderInvariant {
        mus: if pick_conj { conjugated } else { rotated },
        canonical: true,
    }
}

/// Largest coordinate distance between two invariant tuples.
pub fn invariant_distance(a: &FirstOrderInvariant, b: &FirstOrderInvariant) -> f64 {
    assert_eq!(a.mus.len(), b.mus.len(), "invariant tuples of different size");
    a.mus
        .iter()
        .zip(&b.mus)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Linear gauge pair making the linear part of `phi` equal to
/// `z + mu zbar` with `mu = |b/a| >= 0`: `eta = (c z, c a z)` with
/// `c = e^{i theta}`, `theta = -arg(b / conj(a)) / 2`.
///
/// Returns the gauge pair and the transformed jet.
pub fn normalize_linear_part(phi: &DiffeoJet) -> Result<(GaugeTuple, DiffeoJet)> {
    let k = phi.order();
    let (a, b) = phi.linear();
    let theta = if b.norm() == 0.0 { 0.0 } else { -(b / a.conj()).arg() / 2.0 };
    let c = Complex64::from_polar(1.0, theta);
    let psi1 = DiffeoJet::new(Jet2::variable(k)?.scale(c))?;
    let psi2 = DiffeoJet::new(Jet2::variable(k)?.scale(c * a))?;
    let eta = GaugeTuple::new(vec![psi1.clone(), psi2.clone()])?;
    let normalized = psi1.compose(&phi.compose(&psi2.inverse()?)?)?;
    Ok((eta, normalized))
}

/// Witness of a double-pinch normalization: liftable `psi_1, psi_2` with
/// `psi_1 o phi o psi_2^{-1} = z + mu zbar` up to the jet order.
#[derive(Clone, Debug)]
pub struct DoublePinchNormalization {
    pub psi1: DiffeoJet,
    pub psi2: DiffeoJet,
    pub mu: f64,
    /// Sup distance of the recomposed normal form from `z + mu zbar`.
    pub residual: f64,
}

/// One correction pass: linear normalization followed by the ideal
/// split, returning a liftable pair that carries `phi` to the normal
/// form up to one order of float noise.
fn correction_step(phi: &DiffeoJet) -> Result<(DiffeoJet, DiffeoJet)> {
    let k = phi.order();
    let (lin_gauge, phi0) = normalize_linear_part(phi)?;
    let mu = mu_double(&phi0);

    // Remainder r = phi0 - z - mu zbar, split as z u + mu zbar v:
    // monomials with a z-power feed u, pure zbar powers feed v.
    let mut u = Jet2::zero(k)?;
    let mut v = Jet2::zero(k)?;
    for (p, q, c) in phi0.jet().iter() {
        if p + q < 2 {
            continue;
        }
        if p >= 1 {
            u.set(p - 1, q, c);
        } else {
            v.set(0, q - 1, c / mu);
        }
    }

    let (u1, u2) = u.ideal_divide(phi0.jet())?;
    let (v1, v2) = v.ideal_divide(phi0.jet())?;

    let one = Jet2::constant(k, Complex64::ONE)?;
    let z = Jet2::variable(k)?;
    let zbar = Jet2::variable_bar(k)?;
    let pj = phi0.jet();
    let pjc = pj.conjugate();

    // g = 1 + phi conj(v2) + conj(phi) u2 ; psi_2 = z g
    let g = &(&one + &(pj * &v2.conjugate())) + &(&pjc * &u2);
    // h = 1 + z (conj(v2) - u1) + mu zbar (conj(u2) - v1) ; psi_1 = z (h o phi^{-1})
    let h = &(&one + &(&z * &(&v2.conjugate() - &u1)))
        + &(&zbar * &(&u2.conjugate() - &v1)).scale(Complex64::new(mu, 0.0));
    let psi2 = DiffeoJet::new(&z * &g)?;
    let psi1 = DiffeoJet::new(&z * &h.compose(phi0.inverse()?.jet())?)?;

    // Fold the linear gauge back in so the pair acts on the input.
    Ok((
        psi1.compose(&lin_gauge.psis()[0])?,
        psi2.compose(&lin_gauge.psis()[1])?,
    ))
}

/// Normalize a transition jet of a doubly pinched fiber to `z + mu zbar`.
///
/// Constructive scheme: after a linear normalization, split the
/// remainder as `z u + mu zbar v`, divide both `u` and `v` by the ideal
/// `(phi, conj phi)`, and assemble the correcting liftable pair from the
/// division factors; the combination telescopes so that only the
/// division residuals survive.  The step is repeated until the residual
/// stops shrinking, since one pass leaves rounding noise amplified by
/// the witness size.  The witness grows like `(1 - mu^2)^{-(k-1)}` as
/// `mu` approaches 1 (the two ideal generators collide there) and like
/// powers of `1 / mu` as `mu` approaches 0, so the achievable residual
/// degrades near both ends; `residual` reports what was reached.  Fails
/// outright on `mu` below `mu_zero_tol`, where the smooth classification
/// itself degenerates.
pub fn normalize_double_pinched(
    phi: &DiffeoJet,
    mu_zero_tol: f64,
) -> Result<DoublePinchNormalization> {
    let k = phi.order();
    if mu_double(phi) <= mu_zero_tol {
        return Err(Error::MuZero { mu: mu_double(phi) });
    }
    let z = Jet2::variable(k)?;
    let mut psi1 = DiffeoJet::identity(k)?;
    let mut psi2 = DiffeoJet::identity(k)?;
    let mut best: Option<DoublePinchNormalization> = None;
    for _ in 0..=3 {
        let cur = psi1.compose(&phi.compose(&psi2.inverse()?)?)?;
        let mu = mu_double(&cur);
        let target = z.clone().with(0, 1, Complex64::new(mu, 0.0));
        let residual = cur.jet().sup_distance(&target);
        let improved = best.as_ref().map_or(true, |b| residual < b.residual);
        if improved {
            best = Some(DoublePinchNormalization {
                psi1: psi1.clone(),
                psi2: psi2.clone(),
                mu,
                residual,
            });
        }
        if !improved || residual < 1e-13 {
            break;
        }
        let (s1, s2) = correction_step(&cur)?;
        psi1 = s1.compose(&psi1)?;
        psi2 = s2.compose(&psi2)?;
    }
    Ok(best.expect("loop body runs at least once"))
}

/// Outcome of comparing two doubly pinched structures.
#[derive(Clone, Debug)]
pub enum Equivalence {
    /// Gauge pair carrying the first jet to the second.
    Equivalent { witness: (DiffeoJet, DiffeoJet), residual: f64 },
    NotEquivalent { mu_left: f64, mu_right: f64 },
    /// Both moduli vanish within tolerance; the `mu = 0` stratum is not
    /// separated and the algorithm refuses to decide.
    UndecidedMuZero,
}

/// Decide smooth equivalence of two double-pinch transition jets by
/// comparing moduli and, when they agree away from zero, composing the
/// two normalizations into an explicit witness.
pub fn equivalent_double_pinched(
    phi: &DiffeoJet,
    psi: &DiffeoJet,
    mu_eq_tol: f64,
    mu_zero_tol: f64,
) -> Result<Equivalence> {
    let mu_left = mu_double(phi);
    let mu_right = mu_double(psi);
    if (mu_left - mu_right).abs() > mu_eq_tol {
        return Ok(Equivalence::NotEquivalent { mu_left, mu_right });
    }
    if mu_left.min(mu_right) <= mu_zero_tol {
        return Ok(Equivalence::UndecidedMuZero);
    }
    let na = normalize_double_pinched(phi, mu_zero_tol)?;
    let nb = normalize_double_pinched(psi, mu_zero_tol)?;
    // a1 phi a2^{-1} = z + mu zbar = b1 psi b2^{-1}
    // => psi = (b1^{-1} a1) phi (b2^{-1} a2)^{-1}.
    let w1 = nb.psi1.inverse()?.compose(&na.psi1)?;
    let w2 = nb.psi2.inverse()?.compose(&na.psi2)?;
    let carried = w1.compose(&phi.compose(&w2.inverse()?)?)?;
    let residual = carried.jet().sup_distance(psi.jet());
    Ok(Equivalence::Equivalent { witness: (w1, w2), residual })
}

/// Conjugate by the linear scaling `c z` (real `c > 0`): the coefficient
/// at `(p, q)` picks up the factor `c^{1 - p - q}`, computed by actual
/// composition so the scaling law stays an independent check.
pub fn conj_by_scaling(phi: &DiffeoJet, c: f64) -> Result<DiffeoJet> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::NonPositiveScale { c });
    }
    let k = phi.order();
    let outer = Jet2::variable(k)?.scale(Complex64::new(c, 0.0));
    let inner = Jet2::variable(k)?.scale(Complex64::new(1.0 / c, 0.0));
    DiffeoJet::new(outer.compose(&phi.jet().compose(&inner)?)?)
}

/// Build the liftable jet `psi = z (u + i v)` whose imaginary part is
/// the given real-valued jet `f`, where `f = x v + y u` splits by
/// `x`-divisibility in real coordinates (`x`-carrying monomials feed
/// `v`, pure-`y` monomials feed `u`).
pub fn liftable_with_imag_part(f: &Jet2) -> Result<DiffeoJet> {
    let k = f.order();
    let fxy = to_xy(f);
    let max_imag = fxy.max_imag();
    if max_imag > 1e-9 * fxy.sup_norm().max(1.0) {
        return Err(Error::NotRealValued { max_imag });
    }
    let c0 = f.constant_term();
    if c0.norm() > 1e-9 * f.sup_norm().max(1.0) {
        return Err(Error::NonzeroConstantTerm { value: c0 });
    }
    let sub = k.saturating_sub(1);
    let mut vxy = XyPoly::zero(sub);
    let mut uxy = XyPoly::zero(sub);
    for (a, b) in monomials(k) {
        if a + b == 0 {
            continue;
        }
        let c = Complex64::new(fxy.coeff(a, b).re, 0.0);
        if a >= 1 {
            vxy.set(a - 1, b, c);
        } else {
            uxy.set(a, b - 1, c);
        }
    }
    let u = from_xy(&uxy)?.extended(k)?;
    let v = from_xy(&vxy)?.extended(k)?;
    let h = &u + &v.scale(Complex64::i());
    let z = Jet2::variable(k)?;
    // Degenerate df(0) surfaces as |h(0)| = 0 and is rejected here.
    DiffeoJet::new(&z * &h)
}

/// Straighten the imaginary parts of a whole tuple: each transition jet
/// is post-composed with the inverse of the liftable jet sharing its
/// imaginary part, after which `Im phi(z) = Im z` up to the order.
///
/// Returns the straightened tuple and the witness gauge
/// `(id, psi_2, ..., psi_n)` realizing it.
pub fn symplectize_gluing(tuple: &GluingTuple) -> Result<(GluingTuple, GaugeTuple)> {
    let k = tuple.order();
    let mut new_maps = Vec::with_capacity(tuple.maps().len());
    let mut gauge = vec![DiffeoJet::identity(k)?];
    for phi in tuple.maps() {
        let f = phi.jet().imag_part();
        let psi = liftable_with_imag_part(&f)?;
        new_maps.push(phi.compose(&psi.inverse()?)?);
        gauge.push(psi);
    }
    Ok((GluingTuple::new(new_maps)?, GaugeTuple::new(gauge)?))
}

/// Sup distance of `Im phi` from `Im z`, the symplectization residual.
pub fn imag_straightness(phi: &DiffeoJet) -> f64 {
    let k = phi.order();
    let z = Jet2::variable(k).expect("order already validated");
    phi.jet().imag_part().sup_distance(&z.imag_part())
}

/// Dimensions attached to a gauge orbit through a tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRank {
    /// Rank of the linearized action = dimension of the orbit.
    pub orbit_dim: usize,
    /// Dimension of the stabilizer subgroup.
    pub stab_dim: usize,
    /// Codimension of the orbit inside the ambient tuple space.
    pub codim: usize,
    /// Ratio of the last accepted singular value to the first rejected
    /// one (infinite when the matrix has full rank).
    pub sv_gap: f64,
}

/// Dimensions of the gauge group and ambient space for `n` pinches at
/// order `k`, in real parameters.
pub fn gauge_dims(n: usize, k: usize) -> (usize, usize) {
    (n * k * (k + 1), (n - 1) * k * (k + 3))
}

/// Rank of the linearized gauge action at a tuple.
///
/// Directions in slot 1 are `delta = z * z^p zbar^q` (`p + q <= k - 1`,
/// real and imaginary separately) and push forward to `delta o phi_{1,i}`
/// in every component; directions in slot `i >= 2` contribute
/// `-(d_z phi_{1,i} delta + d_zbar phi_{1,i} conj(delta))` in component
/// `i - 1` only.  The rank is read off the singular values with the
/// given relative threshold.
pub fn orbit_tangent_rank(tuple: &GluingTuple, rel_tol: f64) -> OrbitRank {
    let n = tuple.pinches();
    let k = tuple.order();
    let (group_dim, ambient_dim) = gauge_dims(n, k);
    let lie_cols = k * (k + 1); // per slot, real dimension

    // Row layout: per component i, per monomial (p, q) with
    // 1 <= p + q <= k, real then imaginary part.
    let comp_rows = k * (k + 3);
    let mut mat = DMatrix::<f64>::zeros((n - 1) * comp_rows, group_dim);

    let write_jet = |mat: &mut DMatrix<f64>, comp: usize, col: usize, jet: &Jet2, sign: f64| {
        let mut row = comp * comp_rows;
        for (p, q) in monomials(k) {
            if p + q == 0 {
                continue;
            }
            let c = jet.coeff(p, q);
            mat[(row, col)] += sign * c.re;
            mat[(row + 1, col)] += sign * c.im;
            row += 2;
        }
    };

    // Lie-algebra directions per slot, in graded order.
    let directions: Vec<Jet2> = monomials(k - 1)
        .flat_map(|(p, q)| {
            let re = Jet2::monomial(k, p + 1, q, Complex64::ONE).expect("within order");
            let im = Jet2::monomial(k, p + 1, q, Complex64::i()).expect("within order");
            [re, im]
        })
        .collect();
    debug_assert_eq!(directions.len(), lie_cols);

    for (d, delta) in directions.iter().enumerate() {
        // Slot 1: delta o phi_{1,i} in every component.
        for (i, phi) in tuple.maps().iter().enumerate() {
            let pushed = delta.compose(phi.jet()).expect("phi vanishes at 0");
            write_jet(&mut mat, i, d, &pushed, 1.0);
        }
        // Slot i >= 2: derivative term in component i - 1 only.
        for (i, phi) in tuple.maps().iter().enumerate() {
            let col = (i + 2 - 1) * lie_cols + d;
            let dz = phi.jet().derivative_z().extended(k).expect("order k");
            let dzb = phi.jet().derivative_zbar().extended(k).expect("order k");
            let term = &(&dz * delta) + &(&dzb * &delta.conjugate());
            write_jet(&mut mat, i, col, &term, -1.0);
        }
    }

    let svals = mat.singular_values();
    let top = svals.max();
    let cut = rel_tol * top.max(f64::MIN_POSITIVE);
    let mut rank = 0;
    let mut gap = f64::INFINITY;
    let mut sorted: Vec<f64> = svals.iter().copied().collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    for (i, s) in sorted.iter().enumerate() {
        if *s > cut {
            rank = i + 1;
        } else {
            gap = if i == 0 { 0.0 } else { sorted[i - 1] / s.max(f64::MIN_POSITIVE) };
            break;
        }
    }
    OrbitRank {
        orbit_dim: rank,
        stab_dim: group_dim - rank,
        codim: ambient_dim - rank,
        sv_gap: gap,
    }
}

/// Closed forms for the stabilizer dimension and orbit codimension of a
/// generic tuple (`mu_i` distinct and nonzero), in real parameters.
pub fn expected_dims(n: usize, k: usize) -> (usize, usize) {
    let ks = k as isize;
    let ns = n as isize;
    let stab = if k < 2 * n - 1 {
        k * (k + 1) / 2
    } else {
        (ks * ks + (3 - 2 * ns) * ks + (ns - 1) * (2 * ns - 3)) as usize
    };
    let codim = if k < 2 * n - 1 {
        ((-ks * ks + (4 * ns - 5) * ks) / 2) as usize
    } else {
        ((ns - 1) * (2 * ns - 3)) as usize
    };
    (stab, codim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn linear_map(k: usize, a: Complex64, b: Complex64) -> DiffeoJet {
        let jet = Jet2::variable(k).unwrap().scale(a).with(0, 1, b);
        DiffeoJet::new(jet).unwrap()
    }

    pub(super) fn random_gluing(rng: &mut ChaCha8Rng, n: usize, k: usize) -> GluingTuple {
        let mut maps = Vec::new();
        for _ in 0..n - 1 {
            let mut jet = Jet2::zero(k).unwrap();
            for (p, q) in monomials(k) {
                if p + q < 2 {
                    continue;
                }
                jet.set(p, q, c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)));
            }
            let a = Complex64::from_polar(
                rng.gen_range(0.8..1.4),
                rng.gen_range(-3.0..3.0),
            );
            let b = Complex64::from_polar(
                a.norm() * rng.gen_range(0.1..0.9),
                rng.gen_range(-3.0..3.0),
            );
            jet.set(1, 0, a);
            jet.set(0, 1, b);
            maps.push(DiffeoJet::new(jet).unwrap());
        }
        GluingTuple::new(maps).unwrap()
    }

    pub(super) fn random_gauge(
        rng: &mut ChaCha8Rng,
        n: usize,
        k: usize,
        orientation: Orientation,
    ) -> GaugeTuple {
        let mut psis = Vec::new();
        for _ in 0..n {
            let mut h = Jet2::zero(k - 1).unwrap();
            for (p, q) in monomials(k - 1) {
                h.set(p, q, c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)));
            }
            h.set(
                0,
                0,
                Complex64::from_polar(rng.gen_range(0.7..1.5), rng.gen_range(-3.0..3.0)),
            );
            let mut jet = Jet2::zero(k).unwrap();
            for (p, q, v) in h.iter() {
                match orientation {
                    Orientation::Preserving => jet.set(p + 1, q, v),
                    Orientation::Reversing => jet.set(p, q + 1, v),
                }
            }
            psis.push(DiffeoJet::new(jet).unwrap());
        }
        GaugeTuple::new(psis).unwrap()
    }

    #[test]
    fn invariants_of_normalized_linear_map() {
        // eta = (z, a z) acting on a z + b zbar gives z + (b/conj(a)) zbar.
        let k = 3;
        let a = c(2.0, 0.0);
        let b = c(0.0, 1.0);
        let phi = linear_map(k, a, b);
        let eta = GaugeTuple::new(vec![
            DiffeoJet::identity(k).unwrap(),
            linear_map(k, a, Complex64::ZERO),
        ])
        .unwrap();
        let tuple = GluingTuple::new(vec![phi]).unwrap();
        let acted = gauge_act(&eta, &tuple).unwrap();
        let (na, nb) = acted.maps()[0].linear();
        assert!((na - Complex64::ONE).norm() < 1e-12);
        assert!((nb - b / a.conj()).norm() < 1e-12);
        let inv = first_order_invariants(&tuple);
        assert!((inv.mus[0] - b / a.conj()).norm() < 1e-15);
    }

    #[test]
    fn conjugating_gauge_conjugates_invariants() {
        // eta = (zbar, ..., zbar) sends mu to conj(mu).
        let k = 3;
        let mu = c(0.3, 0.2);
        let phi = linear_map(k, Complex64::ONE, mu);
        let tuple = GluingTuple::new(vec![phi]).unwrap();
        let sigma = DiffeoJet::conjugation(k).unwrap();
        let eta = GaugeTuple::new(vec![sigma.clone(), sigma]).unwrap();
        let acted = gauge_act(&eta, &tuple).unwrap();
        let inv = first_order_invariants(&acted);
        assert!((inv.mus[0] - mu.conj()).norm() < 1e-12);
    }

    #[test]
    fn canonical_form_of_single_mu() {
        let inv = FirstOrderInvariant { mus: vec![c(0.0, 0.5)], canonical: false };
        let canon = canonicalize_invariant(&inv, INVARIANT_TOL);
        assert!((canon.mus[0] - c(0.5, 0.0)).norm() < 1e-12);
        assert!(canon.canonical);
    }

    #[test]
    fn canonical_form_prefers_negative_imag_on_second_entry() {
        let inv = FirstOrderInvariant {
            mus: vec![c(0.5, 0.0), c(0.2, 0.4)],
            canonical: false,
        };
        let canon = canonicalize_invariant(&inv, INVARIANT_TOL);
        assert!((canon.mus[1].im - (-0.4)).abs() < 1e-12);
    }

    #[test]
    fn canonical_zero_tuple_is_fixed() {
        let inv = FirstOrderInvariant { mus: vec![Complex64::ZERO; 3], canonical: false };
        let canon = canonicalize_invariant(&inv, INVARIANT_TOL);
        assert_eq!(canon.mus, vec![Complex64::ZERO; 3]);
    }

    #[test]
    fn canonical_invariants_constant_on_orbits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..40 {
            let n = 2 + trial % 3;
            let k = 4;
            let tuple = random_gluing(&mut rng, n, k);
            let orientation = if trial % 2 == 0 {
                Orientation::Preserving
            } else {
                Orientation::Reversing
            };
            let eta = random_gauge(&mut rng, n, k, orientation);
            let acted = gauge_act(&eta, &tuple).unwrap();
            let before = canonicalize_invariant(&first_order_invariants(&tuple), INVARIANT_TOL);
            let after = canonicalize_invariant(&first_order_invariants(&acted), INVARIANT_TOL);
            let drift = invariant_distance(&before, &after);
            assert!(drift < 1e-9, "drift {drift} on trial {trial}");
        }
    }

    #[test]
    fn normalize_linear_part_lands_on_real_mu() {
        let phi = linear_map(4, c(1.2, -0.4), c(0.3, 0.5));
        let mu = mu_double(&phi);
        let (_, normalized) = normalize_linear_part(&phi).unwrap();
        let (a, b) = normalized.linear();
        assert!((a - Complex64::ONE).norm() < 1e-12);
        assert!((b - c(mu, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn double_pinch_normalization_small_example() {
        // z + 0.5 zbar + z^2: one correction step must flatten the z^2.
        let jet = Jet2::variable(4)
            .unwrap()
            .with(0, 1, c(0.5, 0.0))
            .with(2, 0, c(1.0, 0.0));
        let phi = DiffeoJet::new(jet).unwrap();
        let norm = normalize_double_pinched(&phi, MU_ZERO_TOL).unwrap();
        assert!(norm.residual < 1e-10, "residual {}", norm.residual);
        assert!((norm.mu - 0.5).abs() < 1e-12);
    }

    #[test]
    fn double_pinch_normalization_random() {
        // Heavy nonlinear mass (~0.4): witnesses grow like
        // (1 - mu^2)^{-(k-1)} near the mu -> 1 boundary, so the residual
        // floor is loose here; the contract regime is tested separately.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..30 {
            let k = 6;
            let tuple = random_gluing(&mut rng, 2, k);
            let phi = &tuple.maps()[0];
            if mu_double(phi) < 0.05 {
                continue;
            }
            let norm = normalize_double_pinched(phi, MU_ZERO_TOL).unwrap();
            assert!(
                norm.residual < 1e-6,
                "trial {trial}: residual {}",
                norm.residual
            );
            // The witness pair is liftable on both sides.
            assert!(classify_liftable(&norm.psi1).is_liftable());
            assert!(classify_liftable(&norm.psi2).is_liftable());
        }
    }

    #[test]
    fn normalization_rejects_mu_zero() {
        let phi = linear_map(3, Complex64::ONE, Complex64::ZERO);
        assert!(matches!(
            normalize_double_pinched(&phi, MU_ZERO_TOL),
            Err(Error::MuZero { .. })
        ));
    }

    #[test]
    fn equivalence_by_equal_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let k = 5;
        let mu = 0.37;
        let build = |rng: &mut ChaCha8Rng| {
            let mut jet = Jet2::zero(k).unwrap();
            for (p, q) in monomials(k) {
                if p + q < 2 {
                    continue;
                }
                jet.set(p, q, c(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)));
            }
            let a = Complex64::from_polar(1.0, rng.gen_range(-3.0..3.0));
            jet.set(1, 0, a);
            jet.set(0, 1, Complex64::from_polar(mu, rng.gen_range(-3.0..3.0)));
            DiffeoJet::new(jet).unwrap()
        };
        let phi = build(&mut rng);
        let psi = build(&mut rng);
        match equivalent_double_pinched(&phi, &psi, 1e-8, MU_ZERO_TOL).unwrap() {
            Equivalence::Equivalent { residual, .. } => {
                assert!(residual < 1e-8, "witness residual {residual}");
            }
            other => panic!("expected equivalence, got {other:?}"),
        }
    }

    #[test]
    fn distinct_mu_is_not_equivalent() {
        let phi = linear_map(4, Complex64::ONE, c(0.3, 0.0));
        let psi = linear_map(4, Complex64::ONE, c(0.32, 0.0));
        assert!(matches!(
            equivalent_double_pinched(&phi, &psi, 1e-8, MU_ZERO_TOL).unwrap(),
            Equivalence::NotEquivalent { .. }
        ));
    }

    #[test]
    fn mu_zero_is_undecided() {
        let phi = linear_map(4, Complex64::ONE, Complex64::ZERO);
        let psi = linear_map(4, c(1.3, 0.2), Complex64::ZERO);
        assert!(matches!(
            equivalent_double_pinched(&phi, &psi, 1e-8, MU_ZERO_TOL).unwrap(),
            Equivalence::UndecidedMuZero
        ));
    }

    #[test]
    fn scaling_law_matches_composition() {
        let jet = Jet2::variable(5)
            .unwrap()
            .with(3, 0, c(0.7, -0.1))
            .with(1, 2, c(-0.2, 0.4));
        let phi = DiffeoJet::new(jet).unwrap();
        for cval in [2.0, 10.0, 100.0] {
            let scaled = conj_by_scaling(&phi, cval).unwrap();
            for (p, q, orig) in phi.jet().iter() {
                let expect = orig * cval.powi(1 - (p + q) as i32);
                let got = scaled.jet().coeff(p, q);
                assert!(
                    (got - expect).norm() <= 1e-13 * expect.norm().max(1.0),
                    "scaling law broke at ({p},{q})"
                );
            }
        }
    }

    #[test]
    fn liftable_imag_part_examples() {
        // f = y -> psi = z ; f = x -> psi = i z ; f = y + x y -> z(1 + i y).
        let k = 3;
        let y = from_xy(&{
            let mut p = XyPoly::zero(k);
            p.set(0, 1, Complex64::ONE);
            p
        })
        .unwrap();
        let psi = liftable_with_imag_part(&y).unwrap();
        assert!(psi.jet().approx_eq(&Jet2::variable(k).unwrap(), 1e-13));

        let x = from_xy(&{
            let mut p = XyPoly::zero(k);
            p.set(1, 0, Complex64::ONE);
            p
        })
        .unwrap();
        let psi = liftable_with_imag_part(&x).unwrap();
        assert!(psi
            .jet()
            .approx_eq(&Jet2::variable(k).unwrap().scale(Complex64::i()), 1e-13));

        let yxy = from_xy(&{
            let mut p = XyPoly::zero(k);
            p.set(0, 1, Complex64::ONE);
            p.set(1, 1, Complex64::ONE);
            p
        })
        .unwrap();
        let psi = liftable_with_imag_part(&yxy).unwrap();
        assert!(psi.jet().imag_part().approx_eq(&yxy, 1e-13));
        assert!(classify_liftable(&psi).is_liftable());
    }

    #[test]
    fn liftable_imag_part_rejects_complex_input() {
        let f = Jet2::variable(3).unwrap();
        assert!(matches!(
            liftable_with_imag_part(&f),
            Err(Error::NotRealValued { .. })
        ));
    }

    #[test]
    fn symplectize_straightens_rotation() {
        // Phi = (iz): psi = iz and the straightened map is the identity.
        let k = 4;
        let phi = DiffeoJet::new(Jet2::variable(k).unwrap().scale(Complex64::i())).unwrap();
        let tuple = GluingTuple::new(vec![phi]).unwrap();
        let (straight, gauge) = symplectize_gluing(&tuple).unwrap();
        assert!(straight.maps()[0]
            .jet()
            .approx_eq(&Jet2::variable(k).unwrap(), 1e-12));
        assert_eq!(gauge.len(), 2);
    }

    #[test]
    fn symplectize_random_tuples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..20 {
            let n = 2 + trial % 3;
            let tuple = random_gluing(&mut rng, n, 6);
            let (straight, _) = symplectize_gluing(&tuple).unwrap();
            for m in straight.maps() {
                let res = imag_straightness(m);
                assert!(res < 1e-9, "trial {trial}: Im residual {res}");
            }
            let before = canonicalize_invariant(&first_order_invariants(&tuple), INVARIANT_TOL);
            let after = canonicalize_invariant(&first_order_invariants(&straight), INVARIANT_TOL);
            assert!(invariant_distance(&before, &after) < 1e-9);
        }
    }

    #[test]
    fn rank_of_generic_linear_double_pinch() {
        // n = 2, k = 1: orbit dim 3, stabilizer 1, codim 1.
        let phi = linear_map(1, Complex64::ONE, c(0.4, 0.0));
        let tuple = GluingTuple::new(vec![phi]).unwrap();
        let rank = orbit_tangent_rank(&tuple, RANK_REL_TOL);
        assert_eq!(rank.orbit_dim, 3);
        assert_eq!(rank.stab_dim, 1);
        assert_eq!(rank.codim, 1);
        assert!(rank.sv_gap > 1e3);
    }

    #[test]
    fn rank_formulas_small_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 2..=3 {
            for k in 1..=4 {
                let mut maps = Vec::new();
                for _ in 0..n - 1 {
                    let a = Complex64::from_polar(1.0, rng.gen_range(-3.0..3.0));
                    let b = Complex64::from_polar(
                        rng.gen_range(0.2..0.8),
                        rng.gen_range(-3.0..3.0),
                    );
                    maps.push(linear_map(k, a, b));
                }
                let tuple = GluingTuple::new(maps).unwrap();
                let rank = orbit_tangent_rank(&tuple, RANK_REL_TOL);
                let (stab, codim) = expected_dims(n, k);
                assert_eq!(rank.stab_dim, stab, "stab at n={n} k={k}");
                assert_eq!(rank.codim, codim, "codim at n={n} k={k}");
            }
        }
    }

    #[test]
    fn double_pinch_normalization_contract_regime() {
        // Nonlinear mass ~0.02 across the full mu window [0.05, 0.95]:
        // the regime the equivalence checker promises 1e-8 residuals in.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..40 {
            let k = 6;
            let mu = rng.gen_range(0.05..0.95);
            let mut jet = Jet2::zero(k).unwrap();
            for (p, q) in monomials(k) {
                if p + q < 2 {
                    continue;
                }
                jet.set(p, q, c(rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02)));
            }
            jet.set(1, 0, Complex64::from_polar(1.0, rng.gen_range(-3.0..3.0)));
            jet.set(0, 1, Complex64::from_polar(mu, rng.gen_range(-3.0..3.0)));
            let phi = DiffeoJet::new(jet).unwrap();
            let norm = normalize_double_pinched(&phi, MU_ZERO_TOL).unwrap();
            assert!(
                norm.residual < 1e-8,
                "trial {trial}: mu {mu:.3}, residual {}",
                norm.residual
            );
        }
    }

    #[test]
    fn gauge_tuple_rejects_mixed_orientation() {
        let k = 3;
        let zdiv = DiffeoJet::identity(k).unwrap();
        let zbardiv = DiffeoJet::conjugation(k).unwrap();
        assert!(matches!(
            GaugeTuple::new(vec![zdiv, zbardiv]),
            Err(Error::MixedOrientation)
        ));
    }

    #[test]
    fn gluing_tuple_rejects_reversing_map() {
        let k = 2;
        let rev = DiffeoJet::conjugation(k).unwrap();
        assert!(matches!(
            GluingTuple::new(vec![rev]),
            Err(Error::OrientationReversing { .. })
        ));
    }
}
