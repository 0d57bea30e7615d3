//! Truncated power series ("jets") in one complex variable and its
//! conjugate.
//!
//! A [`Jet2`] of order `k` stores complex coefficients `c[p][q]` of the
//! monomials `z^p zbar^q` with `p + q <= k`.  Storage is dense in graded
//! lexicographic order: degree blocks `d = 0..=k`, within a block the
//! power of `z` descends, so the flat index of `(p, q)` is
//! `d (d + 1) / 2 + q` with `d = p + q`.
//!
//! All arithmetic truncates at the common order.  Binary ring operations
//! require equal orders; callers that mix orders must extend or truncate
//! explicitly.  This keeps the truncation degree out of every call site
//! where it would otherwise be an implicit, easy-to-get-wrong argument.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet4::Jet4;

/// Hard cap on the truncation order.
pub const MAX_ORDER: usize = 16;

/// Default truncation order used by front-ends when none is given.
pub const DEFAULT_ORDER: usize = 6;

/// Tolerance below which a constant term is treated as zero, relative to
/// the largest coefficient of the jet.
const CONSTANT_DUST_TOL: f64 = 1e-12;

pub(crate) fn coeff_count(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

#[inline]
pub(crate) fn flat_index(p: usize, q: usize) -> usize {
    let d = p + q;
    d * (d + 1) / 2 + q
}

/// Iterate all `(p, q)` with `p + q <= order` in storage order.
pub fn monomials(order: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=order).flat_map(move |d| (0..=d).map(move |q| (d - q, q)))
}

#[derive(Clone, PartialEq)]
pub struct Jet2 {
    order: usize,
    c: Vec<Complex64>,
}

impl std::fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Jet2(order {}", self.order)?;
        for (p, q) in monomials(self.order) {
            let c = self.coeff(p, q);
            if c != Complex64::ZERO {
                write!(f, ", ({p},{q})={c}")?;
            }
        }
        write!(f, ")")
    }
}

impl Jet2 {
    pub fn zero(order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::OrderTooLarge { order, max: MAX_ORDER });
        }
        Ok(Jet2 { order, c: vec![Complex64::ZERO; coeff_count(order)] })
    }

    pub fn constant(order: usize, value: Complex64) -> Result<Self> {
        let mut j = Jet2::zero(order)?;
        j.c[0] = value;
        Ok(j)
    }

    /// The identity jet `z`.
    pub fn variable(order: usize) -> Result<Self> {
        Jet2::monomial(order, 1, 0, Complex64::ONE)
    }

    /// The conjugate variable `zbar`.
    pub fn variable_bar(order: usize) -> Result<Self> {
        Jet2::monomial(order, 0, 1, Complex64::ONE)
    }

    pub fn monomial(order: usize, p: usize, q: usize, value: Complex64) -> Result<Self> {
        let mut j = Jet2::zero(order)?;
        assert!(p + q <= order, "monomial degree {} beyond order {}", p + q, order);
        j.c[flat_index(p, q)] = value;
        Ok(j)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn coeff(&self, p: usize, q: usize) -> Complex64 {
        assert!(p + q <= self.order, "index ({p},{q}) beyond order {}", self.order);
        self.c[flat_index(p, q)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, value: Complex64) {
        assert!(p + q <= self.order, "index ({p},{q}) beyond order {}", self.order);
        self.c[flat_index(p, q)] = value;
    }

    pub fn add_to(&mut self, p: usize, q: usize, value: Complex64) {
        assert!(p + q <= self.order, "index ({p},{q}) beyond order {}", self.order);
        self.c[flat_index(p, q)] += value;
    }

    /// Builder-style coefficient assignment, convenient in tests.
    pub fn with(mut self, p: usize, q: usize, value: Complex64) -> Self {
        self.set(p, q, value);
        self
    }

    /// Iterate `(p, q, coefficient)` over all stored monomials.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        monomials(self.order).map(move |(p, q)| (p, q, self.c[flat_index(p, q)]))
    }

    pub fn constant_term(&self) -> Complex64 {
        self.c[0]
    }

    /// Linear coefficients `(a, b)` of `a z + b zbar`.
    pub fn linear_part(&self) -> (Complex64, Complex64) {
        if self.order == 0 {
            return (Complex64::ZERO, Complex64::ZERO);
        }
        (self.coeff(1, 0), self.coeff(0, 1))
    }

    /// Largest coefficient magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.c.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude of the difference.
    pub fn sup_distance(&self, other: &Jet2) -> f64 {
        assert_eq!(self.order, other.order, "order mismatch in sup_distance");
        self.c
            .iter()
            .zip(&other.c)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Coefficient-wise comparison after normalizing by the largest input
    /// coefficient magnitude; empty-vs-empty compares equal.
    pub fn approx_eq(&self, other: &Jet2, tol: f64) -> bool {
        let scale = self.sup_norm().max(other.sup_norm());
        if scale == 0.0 {
            return true;
        }
        self.sup_distance(other) <= tol * scale
    }

    pub fn scale(&self, factor: Complex64) -> Jet2 {
        Jet2 { order: self.order, c: self.c.iter().map(|c| c * factor).collect() }
    }

    /// Swap `(p, q) -> (q, p)` and conjugate each coefficient; as a
    /// function this is `z -> conj(f(z))`.
    pub fn conjugate(&self) -> Jet2 {
        let mut out = Jet2 { order: self.order, c: vec![Complex64::ZERO; self.c.len()] };
        for (p, q) in monomials(self.order) {
            out.c[flat_index(q, p)] = self.c[flat_index(p, q)].conj();
        }
        out
    }

    /// Imaginary part `(f - conj f) / 2i` as a jet; the result is
    /// real-valued, i.e. Hermitian in its coefficients.
    pub fn imag_part(&self) -> Jet2 {
        let half_i = Complex64::new(0.0, 0.5);
        &self.scale(Complex64::new(0.0, -0.5)) + &self.conjugate().scale(half_i)
    }

    /// Copy into a jet of the given (not smaller) order.
    pub fn extended(&self, order: usize) -> Result<Jet2> {
        assert!(order >= self.order, "extended() cannot shrink; use truncated()");
        let mut out = Jet2::zero(order)?;
        for (p, q) in monomials(self.order) {
            out.c[flat_index(p, q)] = self.c[flat_index(p, q)];
        }
        Ok(out)
    }

    /// Drop all monomials of degree above `order`.
    pub fn truncated(&self, order: usize) -> Jet2 {
        let order = order.min(self.order);
        Jet2 { order, c: self.c[..coeff_count(order)].to_vec() }
    }

    /// Keep only monomials of total degree exactly `d`.
    pub fn degree_part(&self, d: usize) -> Jet2 {
        let mut out = Jet2 { order: self.order, c: vec![Complex64::ZERO; self.c.len()] };
        if d <= self.order {
            for q in 0..=d {
                let i = flat_index(d - q, q);
                out.c[i] = self.c[i];
            }
        }
        out
    }

    /// Formal derivative in `z`, order drops by one.
    pub fn derivative_z(&self) -> Jet2 {
        let order = self.order.saturating_sub(1);
        let mut out = Jet2 { order, c: vec![Complex64::ZERO; coeff_count(order)] };
        for (p, q) in monomials(self.order) {
            if p >= 1 && p - 1 + q <= order {
                out.c[flat_index(p - 1, q)] = self.c[flat_index(p, q)] * p as f64;
            }
        }
        out
    }

    /// Formal derivative in `zbar`, order drops by one.
    pub fn derivative_zbar(&self) -> Jet2 {
        let order = self.order.saturating_sub(1);
        let mut out = Jet2 { order, c: vec![Complex64::ZERO; coeff_count(order)] };
        for (p, q) in monomials(self.order) {
            if q >= 1 && p + q - 1 <= order {
                out.c[flat_index(p, q - 1)] = self.c[flat_index(p, q)] * q as f64;
            }
        }
        out
    }

    /// Exact polynomial evaluation at a point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zb = z.conj();
        let mut zp = vec![Complex64::ONE; self.order + 1];
        let mut zq = vec![Complex64::ONE; self.order + 1];
        for i in 1..=self.order {
            zp[i] = zp[i - 1] * z;
            zq[i] = zq[i - 1] * zb;
        }
        let mut acc = Complex64::ZERO;
        for (p, q) in monomials(self.order) {
            let c = self.c[flat_index(p, q)];
            if c != Complex64::ZERO {
                acc += c * zp[p] * zq[q];
            }
        }
        acc
    }

    fn require_inner(&self) -> Result<()> {
        let c0 = self.constant_term();
        if c0.norm() > CONSTANT_DUST_TOL * self.sup_norm().max(1.0) {
            return Err(Error::NonzeroConstantTerm { value: c0 });
        }
        Ok(())
    }

    /// Substitute `g` (and its conjugate) for `z` (and `zbar`) in `self`.
    /// Requires `g` to have (numerically) zero constant term, so the
    /// substitution is well defined on truncations.
    pub fn compose(&self, g: &Jet2) -> Result<Jet2> {
        if self.order != g.order {
            return Err(Error::OrderMismatch { left: self.order, right: g.order });
        }
        g.require_inner()?;
        let k = self.order;
        let gbar = g.conjugate();
        // Powers of g and conj(g); g^p has valuation >= p, so monomials
        // with p + q > k cannot contribute and self has none anyway.
        let mut gp = Vec::with_capacity(k + 1);
        let mut gq = Vec::with_capacity(k + 1);
        gp.push(Jet2::constant(k, Complex64::ONE)?);
        gq.push(Jet2::constant(k, Complex64::ONE)?);
        for i in 1..=k {
            gp.push(&gp[i - 1] * g);
            gq.push(&gq[i - 1] * &gbar);
        }
        let mut acc = Jet2::zero(k)?;
        for (p, q) in monomials(k) {
            let c = self.c[flat_index(p, q)];
            if c != Complex64::ZERO {
                acc = &acc + &(&gp[p] * &gq[q]).scale(c);
            }
        }
        Ok(acc)
    }

    /// Compositional inverse: `g` with `self(g) = z` up to the order.
    ///
    /// Built degree by degree: the linear part `a z + b zbar` is inverted
    /// as a real-linear map of the plane (needs `|a| != |b|`), and each
    /// higher degree is the unique correction cancelling the residual
    /// `z - self(g)` at that degree.
    pub fn invert(&self) -> Result<Jet2> {
        self.require_inner()?;
        let (a, b) = self.linear_part();
        let det = a.norm_sqr() - b.norm_sqr();
        if det.abs() <= 1e-9 * a.norm_sqr().max(b.norm_sqr()) {
            return Err(Error::DegenerateLinearPart { a, b });
        }
        let k = self.order;
        // Solve a w + b conj(w) = rhs coefficient-wise:
        // w = (conj(a) rhs - b conj(rhs)) / det, with conj acting on jets.
        let linv = |rhs: &Jet2| -> Jet2 {
            let num = &rhs.scale(a.conj()) - &rhs.conjugate().scale(b);
            num.scale(Complex64::new(1.0 / det, 0.0))
        };
        let z = Jet2::variable(k)?;
        let mut g = linv(&z);
        for d in 2..=k {
            let r = &z - &self.compose(&g)?;
            g = &g + &linv(&r.degree_part(d));
        }
        Ok(g)
    }

    /// Minimum-norm solution `(u1, u2)` of `phi * u1 + conj(phi) * u2 = self`
    /// up to the order.  `phi` must vanish at 0 and have an invertible
    /// linear part; then the system is solvable and the least-squares
    /// residual vanishes up to rounding.
    pub fn ideal_divide(&self, phi: &Jet2) -> Result<(Jet2, Jet2)> {
        if self.order != phi.order {
            return Err(Error::OrderMismatch { left: self.order, right: phi.order });
        }
        self.require_inner()?;
        phi.require_inner()?;
        let (a, b) = phi.linear_part();
        if (a.norm_sqr() - b.norm_sqr()).abs() <= 1e-9 * a.norm_sqr().max(b.norm_sqr()) {
            return Err(Error::DegenerateLinearPart { a, b });
        }
        let k = self.order;
        let m = coeff_count(k);
        let phibar = phi.conjugate();

        // Complex linear system: columns are truncated products of phi
        // (resp. conj phi) with each monomial.
        let mut mat = nalgebra::DMatrix::<Complex64>::zeros(m, 2 * m);
        for (col, (p, q)) in monomials(k).enumerate() {
            let mono = Jet2::monomial(k, p, q, Complex64::ONE)?;
            let c1 = phi * &mono;
            let c2 = &phibar * &mono;
            for (row, (rp, rq)) in monomials(k).enumerate() {
                mat[(row, col)] = c1.coeff(rp, rq);
                mat[(row, m + col)] = c2.coeff(rp, rq);
            }
        }
        let rhs = nalgebra::DVector::<Complex64>::from_iterator(
            m,
            monomials(k).map(|(p, q)| self.coeff(p, q)),
        );
        let svd = mat.svd(true, true);
        let eps = 1e-12 * svd.singular_values.max();
        let sol = svd
            .solve(&rhs, eps)
            .expect("SVD of the division system retains both factor sets");

        let mut u1 = Jet2::zero(k)?;
        let mut u2 = Jet2::zero(k)?;
        for (col, (p, q)) in monomials(k).enumerate() {
            u1.set(p, q, sol[col]);
            u2.set(p, q, sol[m + col]);
        }
        let recomposed = &(phi * &u1) + &(&phibar * &u2);
        let residual = recomposed.sup_distance(self);
        let tol = 1e-9 * self.sup_norm().max(1.0);
        if residual > tol {
            return Err(Error::DivisionResidual { residual, tol });
        }
        Ok((u1, u2))
    }

    /// Substitute `z -> u v`, `zbar -> ubar vbar`; the monomial
    /// `z^p zbar^q` becomes `u^p v^p ubar^q vbar^q` in a jet of doubled
    /// order.
    pub fn substitute_uv(&self) -> Jet4 {
        let mut out = Jet4::zero(2 * self.order);
        for (p, q, c) in self.iter() {
            if c != Complex64::ZERO {
                out.add_to([p, q, p, q], c);
            }
        }
        out
    }
}

impl std::ops::Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.order, rhs.order, "jet order mismatch in add");
        Jet2 {
            order: self.order,
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl std::ops::Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.order, rhs.order, "jet order mismatch in sub");
        Jet2 {
            order: self.order,
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl std::ops::Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 { order: self.order, c: self.c.iter().map(|a| -a).collect() }
    }
}

impl std::ops::Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.order, rhs.order, "jet order mismatch in mul");
        let k = self.order;
        let mut out = Jet2 { order: k, c: vec![Complex64::ZERO; self.c.len()] };
        for (p1, q1) in monomials(k) {
            let a = self.c[flat_index(p1, q1)];
            if a == Complex64::ZERO {
                continue;
            }
            let dmax = k - (p1 + q1);
            for (p2, q2) in monomials(dmax) {
                let b = rhs.c[flat_index(p2, q2)];
                if b == Complex64::ZERO {
                    continue;
                }
                out.c[flat_index(p1 + p2, q1 + q2)] += a * b;
            }
        }
        out
    }
}

/// Polynomial in the real coordinates `x, y` of the plane, same dense
/// graded layout as [`Jet2`] with `(a, b)` the powers of `x, y`.
/// Used to split real-valued jets by their `x`-divisibility.
#[derive(Clone, Debug, PartialEq)]
pub struct XyPoly {
    order: usize,
    c: Vec<Complex64>,
}

impl XyPoly {
    pub fn zero(order: usize) -> XyPoly {
        XyPoly { order, c: vec![Complex64::ZERO; coeff_count(order)] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, a: usize, b: usize) -> Complex64 {
        assert!(a + b <= self.order);
        self.c[flat_index(a, b)]
    }

    pub fn set(&mut self, a: usize, b: usize, value: Complex64) {
        assert!(a + b <= self.order);
        self.c[flat_index(a, b)] = value;
    }

    pub fn max_imag(&self) -> f64 {
        self.c.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.c.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Expand a jet in `z, zbar` into the monomial basis of `x, y` where
/// `z = x + iy`.  Exact linear change of basis via binomial expansion.
pub fn to_xy(f: &Jet2) -> XyPoly {
    let k = f.order();
    let mut out = XyPoly::zero(k);
    let choose = binomials(k);
    for (p, q, c) in f.iter() {
        if c == Complex64::ZERO {
            continue;
        }
        // (x + iy)^p (x - iy)^q
        for j in 0..=p {
            for l in 0..=q {
                let coeff = choose[p][j] as f64 * choose[q][l] as f64;
                let phase = Complex64::i().powu(j as u32)
                    * (-Complex64::i()).powu(l as u32);
                let a = p + q - j - l;
                let b = j + l;
                let v = out.coeff(a, b) + c * coeff * phase;
                out.set(a, b, v);
            }
        }
    }
    out
}

/// Inverse of [`to_xy`]: expand `x^a y^b` with `x = (z + zbar)/2`,
/// `y = (z - zbar)/2i`.
pub fn from_xy(f: &XyPoly) -> Result<Jet2> {
    let k = f.order();
    let mut out = Jet2::zero(k)?;
    let choose = binomials(k);
    for (a, b) in monomials(k) {
        let c = f.coeff(a, b);
        if c == Complex64::ZERO {
            continue;
        }
        let base = c
            * Complex64::new(0.5, 0.0).powu(a as u32)
            * (Complex64::new(0.0, -0.5)).powu(b as u32);
        for j in 0..=a {
            for l in 0..=b {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                let coeff = choose[a][j] as f64 * choose[b][l] as f64 * sign;
                // z-power: j + l from (z)^j ... careful: (z + zbar)^a
                // contributes z^j zbar^(a-j); (z - zbar)^b contributes
                // (-1)^l z^(b-l) zbar^l.
                let p = j + (b - l);
                let q = (a - j) + l;
                out.add_to(p, q, base * coeff);
            }
        }
    }
    Ok(out)
}

fn binomials(n: usize) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![1u64; i + 1];
        for j in 1..i {
            row[j] = rows[i - 1][j - 1] + rows[i - 1][j];
        }
        rows.push(row);
    }
    rows
}
