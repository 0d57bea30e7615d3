//! Numeric moment-map models: local fibration charts, finite-difference
//! Hessians, focus-point detection, mu profiles along one-parameter
//! families, and the almost-direct-product obstruction report.
//!
//! A local model places the fibration `F = g(uv)` in ambient
//! coordinates through a linear frame.  Families carry two such models
//! with jet coefficients polynomial in the parameter `t`; scanning the
//! trace invariant of the two induced complex structures along `t`
//! yields the profile `mu(t)`, and a non-constant profile obstructs any
//! almost-direct-product smooth structure.  The ambient circle factor
//! of a rank-1 singular orbit is suppressed throughout: invariants are
//! constant along the critical circle, so the lab works on the
//! transverse slice.

use std::collections::BTreeMap;

use nalgebra::{Matrix4, SMatrix, Vector2, Vector3, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geom::{
    hessian_to_j, mu_from_trace, trace_invariant, ComplexStructure2, HessianForm,
    HessianOptions,
};
use crate::jet2::Jet2;

/// Default finite-difference step, scaled by the coordinate magnitude.
pub const FD_STEP: f64 = 1e-4;

/// Relative tolerance for the rank-0 precheck in `fd_hessian`.
pub const CRITICAL_TOL: f64 = 1e-6;

/// A deterministic smooth map into the base plane.
pub trait MomentMap {
    fn eval(&self, x: &Vector4<f64>) -> Result<Vector2<f64>>;
}

/// A deterministic smooth map of the suspended (5-dimensional) model.
pub trait MomentMap3 {
    fn eval(&self, x: &SMatrix<f64, 5, 1>) -> Result<Vector3<f64>>;
}

/// Local normal form of a fibration around a focus point: in model
/// coordinates `(p1, p2, q1, q2)` reached by `frame * (x - center)`,
/// the map is `g(uv)` with `u = p1 - i p2`, `v = q1 + i q2` and `g` an
/// invertible plane jet evaluated as an exact polynomial.
#[derive(Clone, Debug)]
pub struct LocalModelChart {
    center: Vector4<f64>,
    frame: Matrix4<f64>,
    chart: Jet2,
    radius: f64,
}

impl LocalModelChart {
    pub fn new(
        center: Vector4<f64>,
        frame: Matrix4<f64>,
        chart: Jet2,
        radius: f64,
    ) -> Result<Self> {
        // Reuse the diffeo-jet validation: g(0) = 0, invertible linear part.
        crate::germ::DiffeoJet::new(chart.clone())?;
        Ok(LocalModelChart { center, frame, chart, radius })
    }

    pub fn model(chart: Jet2) -> Result<Self> {
        LocalModelChart::new(Vector4::zeros(), Matrix4::identity(), chart, 1.0)
    }

    pub fn center(&self) -> &Vector4<f64> {
        &self.center
    }

    pub fn chart(&self) -> &Jet2 {
        &self.chart
    }

    pub fn frame(&self) -> &Matrix4<f64> {
        &self.frame
    }

    /// The chart's linear part as a gluing differential datum.
    pub fn linear(&self) -> (Complex64, Complex64) {
        (self.chart.coeff(1, 0), self.chart.coeff(0, 1))
    }
}

impl MomentMap for LocalModelChart {
    fn eval(&self, x: &Vector4<f64>) -> Result<Vector2<f64>> {
        let local = x - self.center;
        let dist = local.norm();
        if dist > self.radius {
            return Err(Error::OutOfChartRadius { dist, radius: self.radius });
        }
        let m = self.frame * local;
        let u = Complex64::new(m[0], -m[1]);
        let v = Complex64::new(m[2], m[3]);
        let w = self.chart.eval(u * v);
        Ok(Vector2::new(w.re, w.im))
    }
}

/// Black-box moment map with optional declared singular points.
pub struct NumericMomentMap {
    evaluator: Box<dyn Fn(&Vector4<f64>) -> Result<Vector2<f64>> + Send + Sync>,
    singular: Vec<(Vector4<f64>, Option<LocalModelChart>)>,
}

impl NumericMomentMap {
    pub fn new(
        evaluator: impl Fn(&Vector4<f64>) -> Result<Vector2<f64>> + Send + Sync + 'static,
    ) -> Self {
        NumericMomentMap { evaluator: Box::new(evaluator), singular: Vec::new() }
    }

    pub fn with_singular_point(
        mut self,
        point: Vector4<f64>,
        chart: Option<LocalModelChart>,
    ) -> Self {
        self.singular.push((point, chart));
        self
    }

    pub fn singular_points(&self) -> &[(Vector4<f64>, Option<LocalModelChart>)] {
        &self.singular
    }
}

impl MomentMap for NumericMomentMap {
    fn eval(&self, x: &Vector4<f64>) -> Result<Vector2<f64>> {
        (self.evaluator)(x)
    }
}

/// Finite-difference configuration.
#[derive(Clone, Copy, Debug)]
pub struct FdOptions {
    pub step: f64,
    /// One Richardson extrapolation level, `(4 H(h) - H(2h)) / 3`.
    pub richardson: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions { step: FD_STEP, richardson: true }
    }
}

fn fd_jacobian<M: MomentMap + ?Sized>(
    map: &M,
    p: &Vector4<f64>,
    h: f64,
) -> Result<SMatrix<f64, 2, 4>> {
    let mut out = SMatrix::<f64, 2, 4>::zeros();
    for i in 0..4 {
        let mut hi = Vector4::zeros();
        hi[i] = h * p[i].abs().max(1.0);
        let fp = map.eval(&(p + hi))?;
        let fm = map.eval(&(p - hi))?;
        out.set_column(i, &((fp - fm) / (2.0 * hi[i])));
    }
    Ok(out)
}

fn fd_hessian_once<M: MomentMap + ?Sized>(
    map: &M,
    p: &Vector4<f64>,
    h: f64,
) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
    let step = |i: usize| {
        let mut e = Vector4::zeros();
        e[i] = h * p[i].abs().max(1.0);
        e
    };
    let f0 = map.eval(p)?;
    let mut q1 = Matrix4::zeros();
    let mut q2 = Matrix4::zeros();
    for i in 0..4 {
        let ei = step(i);
        let fp = map.eval(&(p + ei))?;
        let fm = map.eval(&(p - ei))?;
        let dd = (fp - f0 * 2.0 + fm) / (ei[i] * ei[i]);
        q1[(i, i)] = dd[0];
        q2[(i, i)] = dd[1];
        for j in (i + 1)..4 {
            let ej = step(j);
            let fpp = map.eval(&(p + ei + ej))?;
            let fpm = map.eval(&(p + ei - ej))?;
            let fmp = map.eval(&(p - ei + ej))?;
            let fmm = map.eval(&(p - ei - ej))?;
            let dd = (fpp - fpm - fmp + fmm) / (4.0 * ei[i] * ej[j]);
            q1[(i, j)] = dd[0];
            q1[(j, i)] = dd[0];
            q2[(i, j)] = dd[1];
            q2[(j, i)] = dd[1];
        }
    }
    Ok((q1, q2))
}

/// Central-difference Hessian pair at a rank-0 point.
///
/// The point must be critical: the finite-difference gradient is
/// required to be below `CRITICAL_TOL` relative to the Hessian scale.
pub fn fd_hessian<M: MomentMap + ?Sized>(
    map: &M,
    p: &Vector4<f64>,
    opts: &FdOptions,
) -> Result<HessianForm> {
    let (q1, q2) = if opts.richardson {
        let (a1, a2) = fd_hessian_once(map, p, opts.step)?;
        let (b1, b2) = fd_hessian_once(map, p, 2.0 * opts.step)?;
        ((a1 * 4.0 - b1) / 3.0, (a2 * 4.0 - b2) / 3.0)
    } else {
        fd_hessian_once(map, p, opts.step)?
    };
    let scale = q1.norm().max(q2.norm());
    let grad = fd_jacobian(map, p, opts.step)?;
    let grad_norm = grad.norm();
    let tol = CRITICAL_TOL * scale.max(1.0);
    if grad_norm > tol {
        return Err(Error::NotCritical { grad_norm, tol });
    }
    Ok(HessianForm::new(q1, q2))
}

/// Outcome of classifying a critical point.
#[derive(Clone, Debug)]
pub enum FocusClassification {
    /// Focus point with its complex structure, both signs.
    FocusFocus(ComplexStructure2, ComplexStructure2),
    /// Critical but not of focus type; carries the diagnostic.
    NotFocus(String),
}

/// Classify a rank-0 point by running the Hessian pair through the
/// null-plane pairing.  Structure-level failures (hyperbolic pairing,
/// missing real null vectors) come back as `NotFocus`; contract
/// violations (non-critical point) stay errors.
pub fn detect_focus<M: MomentMap + ?Sized>(
    map: &M,
    p: &Vector4<f64>,
    fd: &FdOptions,
    hess: &HessianOptions,
) -> Result<FocusClassification> {
    let form = fd_hessian(map, p, fd)?;
    match hessian_to_j(&form, hess) {
        Ok((plus, minus)) => Ok(FocusClassification::FocusFocus(plus, minus)),
        Err(e @ (Error::NotFocusFocus { .. } | Error::NoRealNullVector { .. })) => {
            Ok(FocusClassification::NotFocus(e.to_string()))
        }
        Err(e) => Err(e),
    }
}

/// Plane jet whose coefficients are polynomials in a real parameter.
#[derive(Clone, Debug, Default)]
pub struct TDependentJet {
    order: usize,
    coeffs: BTreeMap<(usize, usize), Vec<Complex64>>,
}

impl TDependentJet {
    pub fn new(order: usize) -> Result<Self> {
        // Order validation as for fixed jets.
        Jet2::zero(order)?;
        Ok(TDependentJet { order, coeffs: BTreeMap::new() })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn set(&mut self, p: usize, q: usize, poly: Vec<Complex64>) {
        assert!(p + q <= self.order, "monomial exceeds jet order");
        if poly.iter().all(|c| *c == Complex64::ZERO) {
            self.coeffs.remove(&(p, q));
        } else {
            self.coeffs.insert((p, q), poly);
        }
    }

    pub fn coeff_polys(&self) -> impl Iterator<Item = (usize, usize, &[Complex64])> {
        self.coeffs.iter().map(|(&(p, q), poly)| (p, q, poly.as_slice()))
    }

    fn coeff_at(poly: &[Complex64], t: f64) -> Complex64 {
        poly.iter()
            .rev()
            .fold(Complex64::ZERO, |acc, c| acc * t + c)
    }

    /// The jet at a parameter value.
    pub fn at(&self, t: f64) -> Jet2 {
        let mut jet = Jet2::zero(self.order).expect("order validated on construction");
        for (&(p, q), poly) in &self.coeffs {
            jet.set(p, q, Self::coeff_at(poly, t));
        }
        jet
    }
}

/// One focus point of a family: an ambient frame and a t-dependent
/// chart jet; the center sits at the origin of its own ambient chart.
#[derive(Clone, Debug)]
pub struct FamilyPoint {
    pub frame: Matrix4<f64>,
    pub chart: TDependentJet,
}

/// A one-parameter family of fibrations with two focus points,
/// parametrizing the critical-value curve by `t`.
#[derive(Clone, Debug)]
pub struct Rank1Family {
    t_min: f64,
    t_max: f64,
    points: Vec<FamilyPoint>,
}

impl Rank1Family {
    pub fn new(t_min: f64, t_max: f64, points: Vec<FamilyPoint>) -> Result<Self> {
        if points.len() != 2 {
            return Err(Error::TupleTooSmall);
        }
        Ok(Rank1Family { t_min, t_max, points })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn points(&self) -> &[FamilyPoint] {
        &self.points
    }

    /// The local model of one focus point at a parameter value.
    pub fn chart_at(&self, point: usize, t: f64) -> Result<LocalModelChart> {
        let fp = &self.points[point];
        LocalModelChart::new(
            Vector4::zeros(),
            fp.frame,
            fp.chart.at(t),
            1.0,
        )
    }

    /// The suspended 5-dimensional map `(x, t) -> (F_t(x), t)` of one
    /// focus point.
    pub fn suspended(&self, point: usize) -> SuspendedPoint<'_> {
        SuspendedPoint { family: self, point }
    }
}

/// Suspension of one family point, exposing the rank-1 structure.
pub struct SuspendedPoint<'a> {
    family: &'a Rank1Family,
    point: usize,
}

impl MomentMap3 for SuspendedPoint<'_> {
    fn eval(&self, x: &SMatrix<f64, 5, 1>) -> Result<Vector3<f64>> {
        let t = x[4];
        let chart = self.family.chart_at(self.point, t)?;
        let f = chart.eval(&Vector4::new(x[0], x[1], x[2], x[3]))?;
        Ok(Vector3::new(f[0], f[1], t))
    }
}

/// One sample of a mu profile.
#[derive(Clone, Debug)]
pub struct ProfileRow {
    pub t: f64,
    pub trace: Option<f64>,
    pub mu: Option<f64>,
    /// `ok`, or the error code of the failure at this sample.
    pub status: String,
}

impl ProfileRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Scan the trace and mu invariants of a family at evenly spaced
/// parameter values.  Samples are independent; failures are recorded
/// per row and the scan continues.  Rows are ordered by `t`.
pub fn mu_profile(
    family: &Rank1Family,
    samples: usize,
    fd: &FdOptions,
    hess: &HessianOptions,
) -> Vec<ProfileRow> {
    let (t_min, t_max) = family.interval();
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = if samples < 2 {
            t_min
        } else {
            t_min + (t_max - t_min) * i as f64 / (samples - 1) as f64
        };
        rows.push(profile_sample(family, t, fd, hess));
    }
    rows
}

fn profile_sample(
    family: &Rank1Family,
    t: f64,
    fd: &FdOptions,
    hess: &HessianOptions,
) -> ProfileRow {
    let run = || -> Result<(f64, f64)> {
        let mut structures = Vec::with_capacity(2);
        for point in 0..2 {
            let chart = family.chart_at(point, t)?;
            match detect_focus(&chart, &Vector4::zeros(), fd, hess)? {
                FocusClassification::FocusFocus(j, _) => structures.push(j),
                FocusClassification::NotFocus(reason) => {
                    return Err(Error::NotFocusFocus { reason });
                }
            }
        }
        let trace = trace_invariant(&structures[0], &structures[1])?;
        Ok((trace, mu_from_trace(trace)))
    };
    match run() {
        Ok((trace, mu)) => ProfileRow { t, trace: Some(trace), mu: Some(mu), status: "ok".into() },
        Err(e) => ProfileRow { t, trace: None, mu: None, status: e.code().into() },
    }
}

/// Wording attached to every consistent report: a flat profile never
/// proves product structure.
pub const PRODUCT_CAVEAT: &str =
    "a constant profile is consistent with, but does not prove, an almost direct product";

/// Verdict of the obstruction scan.
#[derive(Clone, Debug)]
pub enum Obstruction {
    /// Spread within tolerance; explicitly not a proof of product
    /// structure.
    ProductConsistent { spread: f64, threshold: f64, caveat: &'static str },
    /// The mu invariant varies along the critical curve: no smooth
    /// almost-direct-product structure exists.  Evidence is the
    /// extremal pair of samples `(t, mu)`.
    NotAlmostDirectProduct {
        low: (f64, f64),
        high: (f64, f64),
        spread: f64,
        threshold: f64,
    },
}

/// Decide the almost-direct-product obstruction from a profile: the
/// spread of `mu` must exceed `10 x` the per-sample tolerance to count
/// as an obstruction.
pub fn product_obstruction_report(
    profile: &[ProfileRow],
    per_sample_tol: f64,
) -> Result<Obstruction> {
    let valid: Vec<&ProfileRow> = profile.iter().filter(|r| r.is_ok()).collect();
    if valid.len() < 2 {
        return Err(Error::TooFewSamples { valid: valid.len() });
    }
    let mut low = valid[0];
    let mut high = valid[0];
    for row in &valid {
        let mu = row.mu.expect("valid rows carry mu");
        if mu < low.mu.unwrap() {
            low = row;
        }
        if mu > high.mu.unwrap() {
            high = row;
        }
    }
    let spread = high.mu.unwrap() - low.mu.unwrap();
    let threshold = 10.0 * per_sample_tol;
    if spread > threshold {
        Ok(Obstruction::NotAlmostDirectProduct {
            low: (low.t, low.mu.unwrap()),
            high: (high.t, high.mu.unwrap()),
            spread,
            threshold,
        })
    } else {
        Ok(Obstruction::ProductConsistent { spread, threshold, caveat: PRODUCT_CAVEAT })
    }
}

/// Hessian of a rank-1 map restricted to its kernel, valued in its
/// cokernel, with the bases used.
#[derive(Clone, Debug)]
pub struct RestrictedHessian {
    pub form: HessianForm,
    /// Orthonormal kernel basis of the 3x5 Jacobian (columns).
    pub kernel: SMatrix<f64, 5, 4>,
    /// Orthonormal cokernel basis (columns), orthogonal to the image.
    pub coker: SMatrix<f64, 3, 2>,
}

/// Restrict the Hessian of a rank-1 map `R^5 -> R^3` to
/// `Ker dF x Ker dF`, projecting values onto `Coker dF`.
///
/// The Jacobian must have exactly one significant singular value
/// (`> 1e-4`; the other two `< 1e-6`).  Directional second differences
/// along kernel basis vectors build the form; the result feeds the
/// null-plane pairing like any 4-dimensional Hessian.
pub fn rank1_restricted_hessian<M: MomentMap3 + ?Sized>(
    map: &M,
    p: &SMatrix<f64, 5, 1>,
    opts: &FdOptions,
) -> Result<RestrictedHessian> {
    let jac = if opts.richardson {
        let a = fd_jacobian3(map, p, opts.step)?;
        let b = fd_jacobian3(map, p, 2.0 * opts.step)?;
        (a * 4.0 - b) / 3.0
    } else {
        fd_jacobian3(map, p, opts.step)?
    };

    let mut svs: Vec<f64> = jac.svd(false, false).singular_values.iter().copied().collect();
    svs.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    if !(svs[0] > 1e-4 && svs[1] < 1e-6 && svs[2] < 1e-6) {
        let detected = svs.iter().filter(|s| **s > 1e-6).count();
        return Err(Error::RankNotOne { detected });
    }

    // Dominant row direction, polished by power iteration on J^T J;
    // kernel and cokernel are Gram-Schmidt complements of the dominant
    // singular pair.  The bases are deterministic and honestly
    // orthogonal to the image, which dense eigensolvers did not
    // guarantee in practice.
    let mut dir: SMatrix<f64, 5, 1> = jac
        .row_iter()
        .map(|r| r.transpose())
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).expect("finite norms"))
        .expect("three rows");
    dir /= dir.norm();
    for _ in 0..4 {
        dir = jac.transpose() * (jac * dir);
        dir /= dir.norm();
    }
    let mut kernel = SMatrix::<f64, 5, 4>::zeros();
    let mut cands5: Vec<SMatrix<f64, 5, 1>> = (0..5)
        .map(|i| {
            let mut e = SMatrix::<f64, 5, 1>::zeros();
            e[i] = 1.0;
            e - dir * dir[i]
        })
        .collect();
    cands5.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).expect("finite norms"));
    let mut found = 0;
    for c in &cands5 {
        let mut w = *c;
        for col in 0..found {
            let k = kernel.column(col).into_owned();
            w -= k * k.dot(&w);
        }
        if w.norm() > 0.1 {
            kernel.set_column(found, &(w / w.norm()));
            found += 1;
            if found == 4 {
                break;
            }
        }
    }
    assert_eq!(found, 4, "complement of a line in R^5 is 4-dimensional");

    let mut image = jac * dir;
    image /= image.norm();
    let mut coker = SMatrix::<f64, 3, 2>::zeros();
    let mut cands3: Vec<Vector3<f64>> = (0..3)
        .map(|i| {
            let mut e = Vector3::zeros();
            e[i] = 1.0;
            e - image * image[i]
        })
        .collect();
    cands3.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).expect("finite norms"));
    let c0 = cands3[0] / cands3[0].norm();
    let mut c1 = cands3[1] - c0 * c0.dot(&cands3[1]);
    if c1.norm() <= 0.1 {
        c1 = cands3[2] - c0 * c0.dot(&cands3[2]);
    }
    coker.set_column(0, &c0);
    coker.set_column(1, &(c1 / c1.norm()));

    let scale = p.amax().max(1.0);
    let second = |i: usize, j: usize, h: f64| -> Result<Vector3<f64>> {
        let h = h * scale;
        let ki = kernel.column(i).into_owned() * h;
        let kj = kernel.column(j).into_owned() * h;
        let fpp = map.eval(&(p + ki + kj))?;
        let fpm = map.eval(&(p + ki - kj))?;
        let fmp = map.eval(&(p - ki + kj))?;
        let fmm = map.eval(&(p - ki - kj))?;
        Ok((fpp - fpm - fmp + fmm) / (4.0 * h * h))
    };

    let mut q1 = Matrix4::zeros();
    let mut q2 = Matrix4::zeros();
    for i in 0..4 {
        for j in i..4 {
            let val = if opts.richardson {
                let a = second(i, j, opts.step)?;
                let b = second(i, j, 2.0 * opts.step)?;
                (a * 4.0 - b) / 3.0
            } else {
                second(i, j, opts.step)?
            };
            let c0 = coker.column(0).dot(&val);
            let c1 = coker.column(1).dot(&val);
            q1[(i, j)] = c0;
            q1[(j, i)] = c0;
            q2[(i, j)] = c1;
            q2[(j, i)] = c1;
        }
    }
    Ok(RestrictedHessian { form: HessianForm::new(q1, q2), kernel, coker })
}

fn fd_jacobian3<M: MomentMap3 + ?Sized>(
    map: &M,
    p: &SMatrix<f64, 5, 1>,
    h: f64,
) -> Result<SMatrix<f64, 3, 5>> {
    let mut out = SMatrix::<f64, 3, 5>::zeros();
    for i in 0..5 {
        let mut hi = SMatrix::<f64, 5, 1>::zeros();
        hi[i] = h * p[i].abs().max(1.0);
        let fp = map.eval(&(p + hi))?;
        let fm = map.eval(&(p - hi))?;
        out.set_column(i, &((fp - fm) / (2.0 * hi[i])));
    }
    Ok(out)
}
