//! Truncated power series in the model coordinates `u, ubar, v, vbar`.
//!
//! Lifts of plane jets through the fibration `(u, v) -> u v` are very
//! sparse (only exponents of the shape produced by substituting `uv` for
//! `z`), so coefficients live in a `BTreeMap` keyed by the exponent
//! quadruple `[a, b, c, d]` of `u^a ubar^b v^c vbar^d`.  Iteration order
//! is the key order, which keeps every downstream report deterministic.

use std::collections::BTreeMap;

use num_complex::Complex64;

/// Exponents of `u^a ubar^b v^c vbar^d`.
pub type Exps = [usize; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct Jet4 {
    order: usize,
    c: BTreeMap<Exps, Complex64>,
}

impl Jet4 {
    pub fn zero(order: usize) -> Jet4 {
        Jet4 { order, c: BTreeMap::new() }
    }

    pub fn monomial(order: usize, e: Exps, value: Complex64) -> Jet4 {
        let mut j = Jet4::zero(order);
        j.add_to(e, value);
        j
    }

    /// The coordinate `u` as a jet.
    pub fn var_u(order: usize) -> Jet4 {
        Jet4::monomial(order, [1, 0, 0, 0], Complex64::ONE)
    }

    /// The coordinate `ubar` as a jet.
    pub fn var_ubar(order: usize) -> Jet4 {
        Jet4::monomial(order, [0, 1, 0, 0], Complex64::ONE)
    }

    /// The coordinate `v` as a jet.
    pub fn var_v(order: usize) -> Jet4 {
        Jet4::monomial(order, [0, 0, 1, 0], Complex64::ONE)
    }

    /// The coordinate `vbar` as a jet.
    pub fn var_vbar(order: usize) -> Jet4 {
        Jet4::monomial(order, [0, 0, 0, 1], Complex64::ONE)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, e: Exps) -> Complex64 {
        self.c.get(&e).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn add_to(&mut self, e: Exps, value: Complex64) {
        if e.iter().sum::<usize>() > self.order || value == Complex64::ZERO {
            return;
        }
        let slot = self.c.entry(e).or_insert(Complex64::ZERO);
        *slot += value;
        if *slot == Complex64::ZERO {
            self.c.remove(&e);
        }
    }

    /// Iterate nonzero terms in deterministic (key) order.
    pub fn terms(&self) -> impl Iterator<Item = (Exps, Complex64)> + '_ {
        self.c.iter().map(|(e, c)| (*e, *c))
    }

    pub fn sup_norm(&self) -> f64 {
        self.c.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &Jet4) -> f64 {
        let mut worst = 0.0f64;
        for (e, c) in self.terms() {
            worst = worst.max((c - other.coeff(e)).norm());
        }
        for (e, c) in other.terms() {
            worst = worst.max((c - self.coeff(e)).norm());
        }
        worst
    }

    /// Swap `u <-> ubar`, `v <-> vbar` and conjugate coefficients; as a
    /// function this is `x -> conj(f(x))`.
    pub fn conjugate(&self) -> Jet4 {
        let mut out = Jet4::zero(self.order);
        for ([a, b, cc, d], v) in self.terms() {
            out.add_to([b, a, d, cc], v.conj());
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Jet4 {
        let mut out = Jet4::zero(self.order);
        for (e, v) in self.terms() {
            out.add_to(e, v * factor);
        }
        out
    }

    /// Multiply by the monomial `u^a ubar^b v^c vbar^d`, truncating.
    pub fn mul_monomial(&self, e: Exps, value: Complex64) -> Jet4 {
        let mut out = Jet4::zero(self.order);
        for (f, v) in self.terms() {
            out.add_to(
                [f[0] + e[0], f[1] + e[1], f[2] + e[2], f[3] + e[3]],
                v * value,
            );
        }
        out
    }
}

impl std::ops::Add for &Jet4 {
    type Output = Jet4;
    fn add(self, rhs: &Jet4) -> Jet4 {
        assert_eq!(self.order, rhs.order, "jet order mismatch in add");
        let mut out = self.clone();
        for (e, v) in rhs.terms() {
            out.add_to(e, v);
        }
        out
    }
}

impl std::ops::Sub for &Jet4 {
    type Output = Jet4;
    fn sub(self, rhs: &Jet4) -> Jet4 {
        assert_eq!(self.order, rhs.order, "jet order mismatch in sub");
        let mut out = self.clone();
        for (e, v) in rhs.terms() {
            out.add_to(e, -v);
        }
        out
    }
}

impl std::ops::Mul for &Jet4 {
    type Output = Jet4;
    fn mul(self, rhs: &Jet4) -> Jet4 {
        assert_eq!(self.order, rhs.order, "jet order mismatch in mul");
        let mut out = Jet4::zero(self.order);
        for (e, a) in self.terms() {
            for (f, b) in rhs.terms() {
                out.add_to(
                    [e[0] + f[0], e[1] + f[1], e[2] + f[2], e[3] + f[3]],
                    a * b,
                );
            }
        }
        out
    }
}
