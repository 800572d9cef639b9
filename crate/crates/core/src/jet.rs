//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] of order `k` in `n` variables stores the Taylor coefficients
//! `c_α` of a smooth function around a base point for every multi-index
//! with `|α| ≤ k`, so that `f(p + δ) = Σ c_α δ^α + O(|δ|^{k+1})`.
//! Every formula written against the jet operators therefore yields exact
//! partial derivatives up to order `k` (no step size, no cancellation).
//!
//! Monomials are stored in graded order: all degree-0 terms, then degree 1
//! (`e_0, e_1, ...`), then degree 2, and so on. A jet of order `k` is the
//! prefix of that ordering, so truncation is a slice operation.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

/// Highest Taylor order supported by the monomial tables.
pub const MAX_ORDER: usize = 5;

/// Monomial bookkeeping for one variable count.
pub struct JetTable {
    n: usize,
    exps: Vec<Vec<u8>>,
    /// `upto[k]` = number of monomials with degree ≤ k.
    upto: Vec<usize>,
    /// `(i, j, k)` with `m_i * m_j = m_k`, sorted by total degree.
    mul_pairs: Vec<(u32, u32, u32)>,
    /// `mul_end[k]` = number of pairs whose product has degree ≤ k.
    mul_end: Vec<usize>,
    /// `shift[v][m]` = index of `m + e_v` (only for `deg(m) < MAX_ORDER`).
    shift: Vec<Vec<u32>>,
}

impl JetTable {
    fn build(n: usize) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut upto = Vec::with_capacity(MAX_ORDER + 1);
        for d in 0..=MAX_ORDER {
            let mut cur = vec![0u8; n];
            push_degree(&mut exps, &mut cur, 0, d);
            upto.push(exps.len());
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let deg = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();

        let mut pairs = Vec::new();
        for (i, ei) in exps.iter().enumerate() {
            for (j, ej) in exps.iter().enumerate() {
                if deg(ei) + deg(ej) > MAX_ORDER {
                    continue;
                }
                let prod: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                let k = index[&prod];
                pairs.push((deg(&prod), (i as u32, j as u32, k as u32)));
            }
        }
        pairs.sort_by_key(|(d, _)| *d);
        let mut mul_end = vec![0usize; MAX_ORDER + 1];
        for (d, _) in &pairs {
            for slot in mul_end.iter_mut().skip(*d) {
                *slot += 1;
            }
        }
        let mul_pairs = pairs.into_iter().map(|(_, t)| t).collect();

        let mut shift = vec![vec![u32::MAX; exps.len()]; n];
        for (m, e) in exps.iter().enumerate() {
            if deg(e) >= MAX_ORDER {
                continue;
            }
            for (v, row) in shift.iter_mut().enumerate() {
                let mut up = e.clone();
                up[v] += 1;
                row[m] = index[&up] as u32;
            }
        }

        JetTable { n, exps, upto, mul_pairs, mul_end, shift }
    }

    /// Number of coefficients of a jet of the given order.
    pub fn len(&self, order: usize) -> usize {
        self.upto[order]
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    /// Position of the monomial with exponents `exps` in graded order.
    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        let d: usize = exps.iter().map(|&x| x as usize).sum();
        if d > MAX_ORDER {
            return None;
        }
        let lo = if d == 0 { 0 } else { self.upto[d - 1] };
        (lo..self.upto[d]).find(|&i| self.exps[i] == exps)
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, cur: &mut [u8], var: usize, remaining: usize) {
    let n = cur.len();
    if var + 1 == n {
        cur[var] = remaining as u8;
        out.push(cur.to_vec());
        cur[var] = 0;
        return;
    }
    for take in (0..=remaining).rev() {
        cur[var] = take as u8;
        push_degree(out, cur, var + 1, remaining - take);
    }
    cur[var] = 0;
}

/// Shared monomial table for `n` variables.
pub fn table(n: usize) -> Arc<JetTable> {
    static TABLES: OnceLock<Mutex<HashMap<usize, Arc<JetTable>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = tables.lock().expect("jet table cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(JetTable::build(n)))
        .clone()
}

/// Truncated Taylor expansion of a scalar function of `n` variables.
#[derive(Clone)]
pub struct Jet {
    tab: Arc<JetTable>,
    order: usize,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("n", &self.tab.n)
            .field("order", &self.order)
            .field("value", &self.c[0])
            .finish()
    }
}

impl Jet {
    pub fn constant(tab: &Arc<JetTable>, order: usize, value: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = vec![0.0; tab.len(order)];
        c[0] = value;
        Jet { tab: tab.clone(), order, c }
    }

    /// Coordinate jets `x_i = p_i + δ_i` at the base point `p`.
    pub fn seed(point: &[f64], order: usize) -> Vec<Jet> {
        let tab = table(point.len());
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut j = Jet::constant(&tab, order, v);
                if order >= 1 {
                    j.c[1 + i] = 1.0;
                }
                j
            })
            .collect()
    }

    /// Build a jet from explicit Taylor coefficients (graded order).
    pub fn from_coefficients(tab: &Arc<JetTable>, order: usize, c: Vec<f64>) -> Self {
        assert_eq!(c.len(), tab.len(order));
        Jet { tab: tab.clone(), order, c }
    }

    pub fn constant_like(&self, value: f64) -> Self {
        Jet::constant(&self.tab, self.order, value)
    }

    pub fn zero_like(&self) -> Self {
        self.constant_like(0.0)
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.tab.n
    }

    pub fn table(&self) -> &Arc<JetTable> {
        &self.tab
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// Exponent vectors matching [`Jet::coefficients`].
    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.tab.exps[..self.c.len()]
    }

    /// Partial derivative `∂^α f(p)` for the multi-index `α`.
    pub fn derivative(&self, alpha: &[u8]) -> f64 {
        let d: usize = alpha.iter().map(|&a| a as usize).sum();
        if d > self.order {
            panic!("derivative of order {d} requested from a jet of order {}", self.order);
        }
        let idx = self.tab.index_of(alpha).expect("multi-index in range");
        let fact: f64 = alpha.iter().map(|&a| factorial(a as usize)).product();
        self.c[idx] * fact
    }

    /// First partials at the base point.
    pub fn gradient(&self) -> Vec<f64> {
        assert!(self.order >= 1);
        self.c[1..1 + self.tab.n].to_vec()
    }

    /// Exact partial derivative as a jet of one order less.
    pub fn partial(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let len = self.tab.len(order);
        let mut c = vec![0.0; len];
        let shift = &self.tab.shift[var];
        for (m, slot) in c.iter_mut().enumerate() {
            let up = shift[m] as usize;
            let e = self.tab.exps[m][var] as f64 + 1.0;
            *slot = e * self.c[up];
        }
        Jet { tab: self.tab.clone(), order, c }
    }

    pub fn truncated(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet { tab: self.tab.clone(), order, c: self.c[..self.tab.len(order)].to_vec() }
    }

    fn mul_into(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let mut c = vec![0.0; self.tab.len(order)];
        for &(i, j, k) in &self.tab.mul_pairs[..self.tab.mul_end[order]] {
            c[k as usize] += self.c[i as usize] * other.c[j as usize];
        }
        Jet { tab: self.tab.clone(), order, c }
    }

    /// Compose with a univariate function given its derivatives at the
    /// base value: `derivs[m] = g^{(m)}(f(p))`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let k = self.order;
        assert!(derivs.len() > k, "need {} derivatives, got {}", k + 1, derivs.len());
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let mut out = self.constant_like(derivs[k] / factorial(k));
        for m in (0..k).rev() {
            out = out.mul_into(&delta);
            out.c[0] += derivs[m] / factorial(m);
        }
        out
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        let d: Vec<f64> = (0..=self.order).map(|m| [s, c, -s, -c][m % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        let d: Vec<f64> = (0..=self.order).map(|m| [c, -s, -c, s][m % 4]).collect();
        self.compose(&d)
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        self.compose(&vec![e; self.order + 1])
    }

    pub fn ln(&self) -> Jet {
        let a = self.c[0];
        let mut d = vec![a.ln()];
        for m in 1..=self.order {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * factorial(m - 1) / a.powi(m as i32));
        }
        self.compose(&d)
    }

    /// Real power `f^p` (base value must be positive unless `p` is integral).
    pub fn powf(&self, p: f64) -> Jet {
        let a = self.c[0];
        let mut d = Vec::with_capacity(self.order + 1);
        let mut coef = 1.0;
        for m in 0..=self.order {
            d.push(coef * a.powf(p - m as f64));
            coef *= p - m as f64;
        }
        self.compose(&d)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Jet {
        let a = self.c[0];
        let mut d = Vec::with_capacity(self.order + 1);
        let mut coef = 1.0;
        for m in 0..=self.order {
            d.push(coef / a.powi(m as i32 + 1));
            coef *= -(m as f64 + 1.0);
        }
        self.compose(&d)
    }

    pub fn powi(&self, p: u32) -> Jet {
        let mut out = self.constant_like(1.0);
        for _ in 0..p {
            out = out.mul_into(self);
        }
        out
    }

    pub fn square(&self) -> Jet {
        self.mul_into(self)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { tab: self.tab.clone(), order: self.order, c: self.c.iter().map(|v| v * s).collect() }
    }
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|v| v as f64).product()
}

/// Re-seed coordinate jets at a different order (the inputs must be pure
/// coordinate jets `p_i + δ_i`).
pub fn reseed(coords: &[Jet], order: usize) -> Vec<Jet> {
    let p: Vec<f64> = coords.iter().map(Jet::value).collect();
    Jet::seed(&p, order)
}

/// Sum of a sequence of jets (order = minimum order).
pub fn sum<'a>(items: impl IntoIterator<Item = &'a Jet>) -> Option<Jet> {
    let mut it = items.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, j| acc + j))
}

fn add_jets(a: &Jet, b: &Jet, sign: f64) -> Jet {
    let order = a.order.min(b.order);
    let len = a.tab.len(order);
    let c = a.c[..len].iter().zip(&b.c[..len]).map(|(x, y)| x + sign * y).collect();
    Jet { tab: a.tab.clone(), order, c }
}

macro_rules! jet_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| add_jets(a, b, 1.0));
jet_binop!(Sub, sub, |a, b| add_jets(a, b, -1.0));
jet_binop!(Mul, mul, |a, b| a.mul_into(b));
jet_binop!(Div, div, |a, b| a.mul_into(&b.recip()));

macro_rules! jet_scalar_ops {
    ($($t:ty),*) => {$(
        impl Add<f64> for $t {
            type Output = Jet;
            fn add(self, rhs: f64) -> Jet {
                let mut out = self.clone();
                out.c[0] += rhs;
                out
            }
        }
        impl Sub<f64> for $t {
            type Output = Jet;
            fn sub(self, rhs: f64) -> Jet {
                let mut out = self.clone();
                out.c[0] -= rhs;
                out
            }
        }
        impl Mul<f64> for $t {
            type Output = Jet;
            fn mul(self, rhs: f64) -> Jet {
                self.scale(rhs)
            }
        }
        impl Div<f64> for $t {
            type Output = Jet;
            fn div(self, rhs: f64) -> Jet {
                self.scale(1.0 / rhs)
            }
        }
        impl Add<$t> for f64 {
            type Output = Jet;
            fn add(self, rhs: $t) -> Jet {
                rhs + self
            }
        }
        impl Sub<$t> for f64 {
            type Output = Jet;
            fn sub(self, rhs: $t) -> Jet {
                let mut out = rhs.scale(-1.0);
                out.c[0] += self;
                out
            }
        }
        impl Mul<$t> for f64 {
            type Output = Jet;
            fn mul(self, rhs: $t) -> Jet {
                rhs.scale(self)
            }
        }
        impl Div<$t> for f64 {
            type Output = Jet;
            fn div(self, rhs: $t) -> Jet {
                rhs.recip().scale(self)
            }
        }
    )*};
}

jet_scalar_ops!(Jet, &Jet);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = add_jets(self, rhs, 1.0);
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = add_jets(self, &rhs, 1.0);
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self = add_jets(self, rhs, -1.0);
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = add_jets(self, &rhs, -1.0);
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        self.c.iter_mut().for_each(|v| *v *= rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn monomial_counts_match_binomials() {
        let t = table(3);
        // C(3 + k, k)
        assert_eq!(t.len(0), 1);
        assert_eq!(t.len(1), 4);
        assert_eq!(t.len(2), 10);
        assert_eq!(t.len(4), 35);
    }

    #[test]
    fn product_rule_and_chain_rule() {
        let x = Jet::seed(&[0.3, -0.7], 4);
        let f = (&x[0] * &x[1]).sin() + x[0].exp() * &x[1];
        // d/dx0 = cos(x0 x1) x1 + exp(x0) x1
        let (a, b) = (0.3f64, -0.7f64);
        let d0 = (a * b).cos() * b + a.exp() * b;
        assert!(close(f.derivative(&[1, 0]), d0, 1e-14));
        // d2/dx0dx1 = -sin(ab) ab + cos(ab) + exp(a)
        let d01 = -(a * b).sin() * a * b + (a * b).cos() + a.exp();
        assert!(close(f.derivative(&[1, 1]), d01, 1e-14));
        // d4/dx0^4 = sin(ab) b^4 + exp(a) b
        let d4 = (a * b).sin() * b.powi(4) + a.exp() * b;
        assert!(close(f.derivative(&[4, 0]), d4, 1e-13));
    }

    #[test]
    fn partial_commutes_with_derivative() {
        let x = Jet::seed(&[0.4, 1.1, -0.2], 5);
        let f = (&x[0] * &x[0] + &x[1] * &x[2] + 2.0).ln() * x[2].cos();
        let fx = f.partial(0).partial(2);
        assert!(close(fx.derivative(&[1, 1, 0]), f.derivative(&[2, 1, 1]), 1e-12));
        assert_eq!(fx.order(), 3);
    }

    #[test]
    fn recip_powf_sqrt_consistent() {
        let x = Jet::seed(&[1.7], 5);
        let a = x[0].recip() * &x[0];
        assert!(close(a.value(), 1.0, 1e-15));
        for k in 1..=5u8 {
            assert!(a.derivative(&[k]).abs() < 1e-12);
        }
        let s = x[0].sqrt();
        let s2 = &s * &s - &x[0];
        for k in 0..=5u8 {
            assert!(s2.derivative(&[k]).abs() < 1e-12);
        }
        let p = x[0].powf(-2.5) * x[0].powf(2.5);
        assert!(close(p.derivative(&[3]), 0.0, 1e-11));
    }

    #[test]
    fn mixed_orders_truncate_to_minimum() {
        let a = Jet::seed(&[0.5, 0.5], 4);
        let b = Jet::seed(&[0.5, 0.5], 2);
        let c = &a[0] * &b[1];
        assert_eq!(c.order(), 2);
        assert!(close(c.derivative(&[1, 1]), 1.0, 1e-15));
    }
}
