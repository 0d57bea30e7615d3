//! Finite-dimensional geometric invariants: complex structures on the
//! base tangent plane, from gluing differentials and from moment-map
//! Hessians, plus the trace and eigenvalue forms of the first-order
//! invariant.
//!
//! A pinch point orients its base plane with a complex structure.  Two
//! normal charts on one fiber give two structures `J_1, J_2`; after
//! resolving the sign ambiguity, `tr(J_2 J_1^{-1}) = 2 (1 + mu^2) /
//! (1 - mu^2)` recovers the modulus `mu` of the gluing jet.  The same
//! structure is computable from the two Hessian components of the
//! moment map alone, by pairing the two null 2-planes of the common
//! null cone, and from the eigenvalue quadruples of linearized
//! Hamiltonian flows via a Moebius quotient.

use nalgebra::{DMatrix, Matrix2, Matrix4, Matrix4x2, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::germ::DiffeoJet;

/// Tolerance for accepting a matrix as a complex structure.
pub const J_SQUARED_TOL: f64 = 1e-9;

/// Orientation slack in `trace_invariant`: traces must exceed
/// `2 - TRACE_SLACK` after sign resolution.
pub const TRACE_SLACK: f64 = 1e-6;

/// A 2x2 real matrix squaring to minus the identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexStructure2 {
    m: Matrix2<f64>,
}

impl ComplexStructure2 {
    pub fn new(m: Matrix2<f64>) -> Result<Self> {
        let deviation = (m * m + Matrix2::identity()).norm();
        if deviation > J_SQUARED_TOL * m.norm_squared().max(1.0) {
            return Err(Error::NotAComplexStructure { deviation });
        }
        Ok(ComplexStructure2 { m })
    }

    /// Rotation by +90 degrees, the structure of the standard chart.
    pub fn standard() -> Self {
        ComplexStructure2 { m: Matrix2::new(0.0, -1.0, 1.0, 0.0) }
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.m
    }

    pub fn negated(&self) -> Self {
        ComplexStructure2 { m: -self.m }
    }

    /// Conjugate by an invertible matrix: `A J A^{-1}`.
    pub fn conjugated(&self, a: &Matrix2<f64>) -> Result<Self> {
        let inv = a.try_inverse().ok_or(Error::DegenerateLinearPart {
            a: Complex64::new(a[(0, 0)], a[(1, 0)]),
            b: Complex64::new(a[(0, 1)], a[(1, 1)]),
        })?;
        ComplexStructure2::new(a * self.m * inv)
    }
}

/// Real 2x2 matrix of the linear map `z -> a z + b zbar` acting on
/// `(x, y)` coordinates.
pub fn real_matrix(a: Complex64, b: Complex64) -> Matrix2<f64> {
    Matrix2::new(a.re + b.re, -a.im + b.im, a.im + b.im, a.re - b.re)
}

/// Complex structure induced on the target chart by a gluing jet:
/// `J = D J_st D^{-1}` with `D` the real matrix of the linear part.
pub fn j_from_gluing(phi: &DiffeoJet) -> ComplexStructure2 {
    let (a, b) = phi.linear();
    let d = real_matrix(a, b);
    let inv = d.try_inverse().expect("diffeo jets have invertible linear part");
    let jst = ComplexStructure2::standard();
    ComplexStructure2 { m: d * jst.m * inv }
}

/// Trace pairing of two complex structures, with the sign of `J_2`
/// resolved so both induce the same orientation.  Always >= 2; equals
/// `2 (1 + mu^2) / (1 - mu^2)` for structures induced by a gluing jet
/// of modulus `mu`.
pub fn trace_invariant(j1: &ComplexStructure2, j2: &ComplexStructure2) -> Result<f64> {
    // J^{-1} = -J for a complex structure.
    let t = (j2.m * (-j1.m)).trace();
    let resolved = t.abs();
    if resolved < 2.0 - TRACE_SLACK {
        return Err(Error::OrientationMismatch { trace: t });
    }
    Ok(resolved)
}

/// Modulus recovered from a trace value: `sqrt((t - 2) / (t + 2))`.
pub fn mu_from_trace(t: f64) -> f64 {
    ((t - 2.0).max(0.0) / (t + 2.0)).sqrt()
}

/// Two symmetric 4x4 forms, the Hessian components of a moment map at
/// a rank-0 point expressed in a base chart.
#[derive(Clone, Debug, PartialEq)]
pub struct HessianForm {
    q1: Matrix4<f64>,
    q2: Matrix4<f64>,
}

impl HessianForm {
    /// Stores the symmetrized forms; finite-difference builders are
    /// symmetric by construction, direct input is averaged.
    pub fn new(q1: Matrix4<f64>, q2: Matrix4<f64>) -> Self {
        HessianForm {
            q1: (q1 + q1.transpose()) * 0.5,
            q2: (q2 + q2.transpose()) * 0.5,
        }
    }

    /// Hessians of `(Re uv, Im uv)` in model coordinates
    /// `(p1, p2, q1, q2)` with `u = p1 - i p2`, `v = q1 + i q2`.
    pub fn focus_model() -> Self {
        let q1 = Matrix4::new(
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0,
        );
        let q2 = Matrix4::new(
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, -1.0, 0.0, //
            0.0, -1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0,
        );
        HessianForm { q1, q2 }
    }

    /// Hessians of `g(uv)` for the linear chart `g = a z + b zbar`: the
    /// model pair mixed by the real matrix of `g`.
    pub fn from_linear_chart(a: Complex64, b: Complex64) -> Self {
        let model = HessianForm::focus_model();
        let d = real_matrix(a, b);
        HessianForm {
            q1: model.q1 * d[(0, 0)] + model.q2 * d[(0, 1)],
            q2: model.q1 * d[(1, 0)] + model.q2 * d[(1, 1)],
        }
    }

    /// Pull back along the linear change of coordinates `x -> T x`.
    pub fn transformed(&self, t: &Matrix4<f64>) -> Self {
        HessianForm {
            q1: t.transpose() * self.q1 * t,
            q2: t.transpose() * self.q2 * t,
        }
    }

    pub fn components(&self) -> (&Matrix4<f64>, &Matrix4<f64>) {
        (&self.q1, &self.q2)
    }

    fn scale(&self) -> f64 {
        self.q1.norm().max(self.q2.norm())
    }
}

/// Knobs for the randomized null-plane search.
#[derive(Clone, Copy, Debug)]
pub struct HessianOptions {
    pub seed: u64,
    /// Relative tolerance for conic residuals and root acceptance.
    pub tol: f64,
    /// Plane resamples before declaring no real null vector.
    pub max_resamples: usize,
}

impl Default for HessianOptions {
    fn default() -> Self {
        HessianOptions { seed: 0, tol: 1e-8, max_resamples: 20 }
    }
}

/// Real roots of a polynomial with coefficients `c[i]` on `t^i`, via
/// companion-matrix eigenvalues.
fn real_roots(c: &[f64]) -> Vec<f64> {
    let top = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if top == 0.0 {
        return Vec::new();
    }
    let deg = match c.iter().rposition(|x| x.abs() > 1e-12 * top) {
        Some(d) if d >= 1 => d,
        _ => return Vec::new(),
    };
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / c[deg];
    }
    let eigs = comp.complex_eigenvalues();
    let mut out: Vec<f64> = eigs
        .iter()
        .filter(|l| l.im.abs() <= 1e-8 * (1.0 + l.re.abs()))
        .map(|l| l.re)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    out
}

fn quad(q: &Matrix4<f64>, x: &Vector4<f64>, y: &Vector4<f64>) -> f64 {
    (x.transpose() * q * y)[(0, 0)]
}

fn random_unit4(rng: &mut ChaCha8Rng) -> Vector4<f64> {
    loop {
        let v = Vector4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 {
            return v / n;
        }
    }
}

/// One vector on the common null cone `{Q1(x,x) = Q2(x,x) = 0}`, found
/// by slicing with a random affine 2-plane `x = a + s b + t c` and
/// eliminating `s` through the resultant of the two resulting conics.
/// With `exclude` given, only vectors with a substantial component
/// outside that plane are accepted.
fn find_null_vector(
    h: &HessianForm,
    rng: &mut ChaCha8Rng,
    opts: &HessianOptions,
    exclude: Option<&Matrix4x2<f64>>,
) -> Result<Vector4<f64>> {
    let scale = h.scale();
    for attempt in 0..opts.max_resamples {
        let (a, b, c) = (random_unit4(rng), random_unit4(rng), random_unit4(rng));
        // Conic i in (s, t): A s^2 + B(t) s + C(t) with polynomial
        // coefficients in t.
        let mut aa = [0.0; 2];
        let mut bb = [[0.0; 2]; 2];
        let mut cc = [[0.0; 3]; 2];
        for (i, q) in [&h.q1, &h.q2].into_iter().enumerate() {
            aa[i] = quad(q, &b, &b);
            bb[i] = [2.0 * quad(q, &a, &b), 2.0 * quad(q, &b, &c)];
            cc[i] = [quad(q, &a, &a), 2.0 * quad(q, &a, &c), quad(q, &c, &c)];
        }
        // Resultant of the two quadratics in s: degree 4 in t.
        let ac = poly_sub(&poly_mul(&[aa[0]], &cc[1]), &poly_mul(&[aa[1]], &cc[0]));
        let ab = poly_sub(&poly_mul(&[aa[0]], &bb[1]), &poly_mul(&[aa[1]], &bb[0]));
        let bc = poly_sub(&poly_mul(&bb[0], &cc[1]), &poly_mul(&bb[1], &cc[0]));
        let res = poly_sub(&poly_mul(&ac, &ac), &poly_mul(&ab, &bc));

        for t in real_roots(&res) {
            let b1 = bb[0][0] + t * bb[0][1];
            let b2 = bb[1][0] + t * bb[1][1];
            let c1 = cc[0][0] + t * (cc[0][1] + t * cc[0][2]);
            let c2 = cc[1][0] + t * (cc[1][1] + t * cc[1][2]);
            let denom = aa[1] * b1 - aa[0] * b2;
            if denom.abs() < 1e-10 * scale * scale {
                continue;
            }
            let s = (aa[0] * c2 - aa[1] * c1) / denom;
            let x = a + b * s + c * t;
            let xn = x.norm();
            if xn < 1e-6 {
                continue;
            }
            let r1 = quad(&h.q1, &x, &x).abs();
            let r2 = quad(&h.q2, &x, &x).abs();
            if r1 > opts.tol * scale * xn * xn || r2 > opts.tol * scale * xn * xn {
                continue;
            }
            let xu = x / xn;
            if let Some(v) = exclude {
                let inside = v * (v.transpose() * xu);
                if (xu - inside).norm() < 0.3 {
                    continue;
                }
            }
            return Ok(xu);
        }
        let _ = attempt;
    }
    Err(Error::NoRealNullVector { attempts: opts.max_resamples })
}

/// The null 2-plane through a null vector: kernel of the 2x4 map
/// `y -> (Q1(x, y), Q2(x, y))`, i.e. the orthogonal complement of
/// `span(Q1 x, Q2 x)`, built by pivoted Gram-Schmidt.  A dense
/// eigensolver is deliberately avoided here: on these rank-2 matrices
/// it has been observed to hand back eigenvectors paired with the
/// wrong eigenvalues, silently corrupting the plane.
fn null_plane(h: &HessianForm, x: &Vector4<f64>) -> Option<Matrix4x2<f64>> {
    let r1 = h.q1 * x;
    let r2 = h.q2 * x;
    let scale = h.scale() * x.norm();
    let n1 = r1.norm();
    if n1 <= 1e-10 * scale {
        return None;
    }
    let u1 = r1 / n1;
    let w = r2 - u1 * u1.dot(&r2);
    let wn = w.norm();
    // Parallel images mean the kernel is not a clean 2-plane.
    if wn <= 1e-10 * scale {
        return None;
    }
    let u2 = w / wn;
    let mut cands: Vec<Vector4<f64>> = (0..4)
        .map(|i| {
            let e = Vector4::ith(i, 1.0);
            e - u1 * u1[i] - u2 * u2[i]
        })
        .collect();
    cands.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).expect("finite norms"));
    let v1 = cands[0] / cands[0].norm();
    let v2 = cands[1..].iter().find_map(|c| {
        let w = c - v1 * v1.dot(c);
        (w.norm() > 0.1).then(|| w / w.norm())
    })?;
    let mut v = Matrix4x2::zeros();
    v.set_column(0, &v1);
    v.set_column(1, &v2);
    Some(v)
}

/// Complex structure determined by the Hessian pair of a focus point,
/// up to sign; both signs are returned.
///
/// The common null cone of a focus-focus Hessian pair is two transverse
/// 2-planes.  Pairing them through the forms, `D_xi = d^2 F(xi, .)`
/// restricted to the opposite plane, yields `R = D_eta D_xi^{-1}` whose
/// traceless part `N` satisfies `N^2 = -det(N) I`; when `det N > 0` the
/// normalized `N` is the structure.  A negative determinant is
/// conclusive evidence of hyperbolic pairing and fails fast.
pub fn hessian_to_j(
    h: &HessianForm,
    opts: &HessianOptions,
) -> Result<(ComplexStructure2, ComplexStructure2)> {
    let scale = h.scale();
    if scale == 0.0 {
        return Err(Error::NotFocusFocus { reason: "zero Hessian pair".into() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut v1 = None;
    for _ in 0..opts.max_resamples {
        let x1 = find_null_vector(h, &mut rng, opts, None)?;
        if let Some(v) = null_plane(h, &x1) {
            v1 = Some(v);
            break;
        }
    }
    let v1 = v1.ok_or(Error::NotFocusFocus {
        reason: "no isotropic 2-plane through the null vectors found".into(),
    })?;

    let mut v2 = None;
    for _ in 0..opts.max_resamples {
        let x2 = find_null_vector(h, &mut rng, opts, Some(&v1))?;
        if let Some(v) = null_plane(h, &x2) {
            v2 = Some(v);
            break;
        }
    }
    let v2 = v2.ok_or(Error::NotFocusFocus {
        reason: "no second isotropic 2-plane found".into(),
    })?;

    let pairing = |xi: &Vector4<f64>| -> Matrix2<f64> {
        Matrix2::new(
            quad(&h.q1, xi, &v2.column(0).into_owned()),
            quad(&h.q1, xi, &v2.column(1).into_owned()),
            quad(&h.q2, xi, &v2.column(0).into_owned()),
            quad(&h.q2, xi, &v2.column(1).into_owned()),
        )
    };

    for _ in 0..opts.max_resamples {
        let co = Matrix2::from_fn(|_, _| rng.gen_range(-1.0f64..1.0));
        if co.determinant().abs() < 0.1 {
            continue;
        }
        let xi = v1 * co.column(0).into_owned();
        let eta = v1 * co.column(1).into_owned();
        let d_xi = pairing(&xi);
        let svd = d_xi.svd(false, false);
        let smax = svd.singular_values[0].max(svd.singular_values[1]);
        let smin = svd.singular_values[0].min(svd.singular_values[1]);
        if smax == 0.0 || smin / smax < 1e-6 {
            continue;
        }
        let d_eta = pairing(&eta);
        let r = d_eta * d_xi.try_inverse().expect("conditioning checked");
        let n = r - Matrix2::identity() * (r.trace() / 2.0);
        let det = n.determinant();
        let nn = n.norm_squared();
        if det < -1e-8 * nn {
            return Err(Error::NotFocusFocus {
                reason: "null-plane pairing has hyperbolic signature".into(),
            });
        }
        if det <= 1e-8 * nn.max(1e-300) {
            continue;
        }
        let j = n / det.sqrt();
        let structure = ComplexStructure2::new(j)?;
        // Compatibility: the induced fiber structure intertwines the
        // pairings, D_eta (D_xi^{-1} J D_xi) = J D_eta.
        let j_fib = d_xi.try_inverse().expect("conditioning checked") * j * d_xi;
        let defect = (d_eta * j_fib - j * d_eta).norm();
        if defect > 1e-6 * d_eta.norm().max(1e-300) {
            return Err(Error::NotFocusFocus {
                reason: "fiber structure fails to intertwine the pairings".into(),
            });
        }
        return Ok((structure, structure.negated()));
    }
    Err(Error::NotFocusFocus {
        reason: "pairing between the null planes stayed degenerate".into(),
    })
}

/// Moebius form of the first-order invariant from two linearization
/// eigenvalues: `(lambda_i - lambda_1) / (lambda_i + conj lambda_1)`.
/// Exactly invariant under the common reparametrization
/// `lambda -> a lambda + b i` with real `a != 0, b`.
pub fn eigen_mu(lambda1: Complex64, lambda_i: Complex64) -> Result<Complex64> {
    let denom = lambda_i + lambda1.conj();
    if denom.norm() <= 1e-12 * (lambda1.norm() + lambda_i.norm()).max(1.0) {
        return Err(Error::VanishingDenominator);
    }
    Ok((lambda_i - lambda1) / denom)
}

/// How to resolve the four-fold eigenvalue symmetry.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum EigenConvention {
    /// `Re > 0`, `Im >= 0`.
    #[default]
    PositiveHalfPlane,
    /// `Re > 0` and the sign of `Im` matching the reference value,
    /// keeping a family's selection consistent across points.
    MatchReference(Complex64),
}

/// Eigenvalues of a linearized flow at a focus point: a quadruple with
/// the `+-a +-b i` symmetry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigQuadruple {
    values: [Complex64; 4],
    a: f64,
    b: f64,
}

impl EigQuadruple {
    pub fn new(values: [Complex64; 4]) -> Result<Self> {
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        let tol = 1e-9 * scale;
        let a = values[0].re.abs();
        let b = values[0].im.abs();
        let mut expected = vec![
            Complex64::new(a, b),
            Complex64::new(a, -b),
            Complex64::new(-a, b),
            Complex64::new(-a, -b),
        ];
        for v in &values {
            let hit = expected
                .iter()
                .position(|e| (v - e).norm() <= tol)
                .ok_or(Error::MalformedQuadruple)?;
            expected.swap_remove(hit);
        }
        Ok(EigQuadruple { values, a, b })
    }

    pub fn values(&self) -> &[Complex64; 4] {
        &self.values
    }

    /// The representative selected by the convention.
    pub fn select(&self, convention: EigenConvention) -> Result<Complex64> {
        let scale = self.a.max(self.b).max(1.0);
        if self.a <= 1e-9 * scale {
            return Err(Error::ZeroRealPart);
        }
        let im_sign = match convention {
            EigenConvention::PositiveHalfPlane => 1.0,
            EigenConvention::MatchReference(r) => {
                if r.im < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
        };
        Ok(Complex64::new(self.a, im_sign * self.b))
    }
}

/// Validate a quadruple and select its representative in one call.
pub fn select_eigenvalue(
    values: [Complex64; 4],
    convention: EigenConvention,
) -> Result<Complex64> {
    EigQuadruple::new(values)?.select(convention)
}
