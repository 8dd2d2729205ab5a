//! Truncated multivariate Taylor jets in Wirtinger coordinates.
//!
//! A jet holds the Taylor coefficients of a scalar function around a point,
//! expanded in the `4n` independent variables `z, z̄, η, η̄`. Arithmetic on
//! jets is exact modulo the truncation ideal, so every derivative read off a
//! jet equals the analytic derivative up to floating point rounding.
//!
//! Conjugation maps `Σ c_α z^a z̄^b η^c η̄^d` to `Σ conj(c_α) z^b z̄^a η^d η̄^c`,
//! which is the Wirtinger rule `∂_w conj(f) = conj(∂_w̄ f)`.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

/// Hard cap on derivative order handled by the engine.
pub const MAX_ORDER: u8 = 5;

/// Variable groups, in storage order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Z,
    ZBar,
    Eta,
    EtaBar,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::Z, Group::ZBar, Group::Eta, Group::EtaBar];

    fn offset(self) -> usize {
        match self {
            Group::Z => 0,
            Group::ZBar => 1,
            Group::Eta => 2,
            Group::EtaBar => 3,
        }
    }

    pub fn conjugate(self) -> Group {
        match self {
            Group::Z => Group::ZBar,
            Group::ZBar => Group::Z,
            Group::Eta => Group::EtaBar,
            Group::EtaBar => Group::Eta,
        }
    }

    pub fn is_position(self) -> bool {
        matches!(self, Group::Z | Group::ZBar)
    }
}

/// Truncation shape: total degree `<= order` and combined `z, z̄` degree
/// `<= z_order`. Both bounds keep the monomial set downward closed, so the
/// truncated jets form a ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub order: u8,
    pub z_order: u8,
}

impl Shape {
    pub fn new(order: u8, z_order: u8) -> Self {
        Shape {
            order,
            z_order: z_order.min(order),
        }
    }

    fn meet(self, other: Shape) -> Shape {
        Shape {
            order: self.order.min(other.order),
            z_order: self.z_order.min(other.z_order),
        }
    }

    fn after_derivative(self, group: Group) -> Shape {
        assert!(self.order > 0, "derivative taken past the jet order");
        if group.is_position() {
            assert!(self.z_order > 0, "position derivative taken past the jet z-order");
            Shape::new(self.order - 1, self.z_order - 1)
        } else {
            Shape::new(self.order - 1, self.z_order)
        }
    }
}

/// Monomial bookkeeping shared by every jet of a given dimension and shape.
pub struct JetSpace {
    dim: usize,
    shape: Shape,
    exps: Vec<Vec<u8>>,
    deg: Vec<u8>,
    zdeg: Vec<u8>,
    lookup: HashMap<Vec<u8>, u32>,
    mul_start: Vec<u32>,
    mul_pairs: Vec<(u32, u32)>,
    deriv: Vec<Vec<(u32, f64)>>,
    conj_perm: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

type SpaceCache = Mutex<HashMap<(usize, Shape), Arc<JetSpace>>>;

impl JetSpace {
    /// Shared space for `dim` complex coordinates and the given shape.
    pub fn get(dim: usize, shape: Shape) -> Arc<JetSpace> {
        static CACHE: OnceLock<SpaceCache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(space) = cache.lock().expect("jet space cache poisoned").get(&(dim, shape)) {
            return Arc::clone(space);
        }
        let space = Arc::new(JetSpace::build(dim, shape));
        cache
            .lock()
            .expect("jet space cache poisoned")
            .entry((dim, shape))
            .or_insert(space)
            .clone()
    }

    fn build(dim: usize, shape: Shape) -> JetSpace {
        let nvars = 4 * dim;
        let mut exps = Vec::new();
        let mut current = vec![0u8; nvars];
        enumerate(&mut current, 0, 0, 0, dim, shape, &mut exps);
        exps.sort_by(|a, b| {
            let da: u32 = a.iter().map(|&e| e as u32).sum();
            let db: u32 = b.iter().map(|&e| e as u32).sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        let deg: Vec<u8> = exps.iter().map(|e| e.iter().sum()).collect();
        let zdeg: Vec<u8> = exps.iter().map(|e| e[..2 * dim].iter().sum()).collect();
        let lookup: HashMap<Vec<u8>, u32> = exps.iter().enumerate().map(|(i, e)| (e.clone(), i as u32)).collect();

        // Product table grouped by the left factor.
        let mut by_left: Vec<Vec<(u32, u32)>> = vec![Vec::new(); exps.len()];
        for (k, e) in exps.iter().enumerate() {
            let mut left = vec![0u8; nvars];
            divisors(e, &mut left, 0, &mut |l| {
                let right: Vec<u8> = e.iter().zip(l).map(|(a, b)| a - b).collect();
                let i = lookup[l];
                let j = lookup[&right];
                by_left[i as usize].push((j, k as u32));
            });
        }
        let mut mul_start = Vec::with_capacity(exps.len() + 1);
        let mut mul_pairs = Vec::new();
        for pairs in by_left {
            mul_start.push(mul_pairs.len() as u32);
            mul_pairs.extend(pairs);
        }
        mul_start.push(mul_pairs.len() as u32);

        let deriv = (0..nvars)
            .map(|v| {
                exps.iter()
                    .map(|e| {
                        let mut up = e.clone();
                        up[v] += 1;
                        match lookup.get(&up) {
                            Some(&src) => (src, up[v] as f64),
                            None => (ABSENT, 0.0),
                        }
                    })
                    .collect()
            })
            .collect();

        let conj_perm = exps
            .iter()
            .map(|e| {
                let mut sw = vec![0u8; nvars];
                for k in 0..dim {
                    sw[k] = e[dim + k];
                    sw[dim + k] = e[k];
                    sw[2 * dim + k] = e[3 * dim + k];
                    sw[3 * dim + k] = e[2 * dim + k];
                }
                lookup[&sw]
            })
            .collect();

        JetSpace {
            dim,
            shape,
            exps,
            deg,
            zdeg,
            lookup,
            mul_start,
            mul_pairs,
            deriv,
            conj_perm,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Flat variable index of `(group, k)`.
    pub fn var(&self, group: Group, k: usize) -> usize {
        assert!(k < self.dim, "variable index out of range");
        group.offset() * self.dim + k
    }

    fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.lookup.get(exps).map(|&i| i as usize)
    }
}

fn enumerate(current: &mut Vec<u8>, pos: usize, deg: u8, zdeg: u8, dim: usize, shape: Shape, out: &mut Vec<Vec<u8>>) {
    if pos == current.len() {
        out.push(current.clone());
        return;
    }
    let is_z = pos < 2 * dim;
    let mut e = 0u8;
    loop {
        let d = deg + e;
        let zd = if is_z { zdeg + e } else { zdeg };
        if d > shape.order || zd > shape.z_order {
            break;
        }
        current[pos] = e;
        enumerate(current, pos + 1, d, zd, dim, shape, out);
        e += 1;
    }
    current[pos] = 0;
}

fn divisors(e: &[u8], left: &mut Vec<u8>, pos: usize, f: &mut dyn FnMut(&Vec<u8>)) {
    if pos == e.len() {
        f(left);
        return;
    }
    for x in 0..=e[pos] {
        left[pos] = x;
        divisors(e, left, pos + 1, f);
    }
    left[pos] = 0;
}

/// A truncated Taylor expansion together with the shape on which its
/// coefficients are exact.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    c: Vec<Complex64>,
    valid: Shape,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet")
            .field("value", &self.value())
            .field("valid", &self.valid)
            .finish()
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: Complex64) -> Jet {
        let mut c = vec![Complex64::new(0.0, 0.0); space.len()];
        c[0] = value;
        Jet {
            space: Arc::clone(space),
            c,
            valid: space.shape,
        }
    }

    /// The coordinate function `(group, k)` expanded around `value`.
    pub fn variable(space: &Arc<JetSpace>, group: Group, k: usize, value: Complex64) -> Jet {
        let mut jet = Jet::constant(space, value);
        if space.shape.order == 0 || (group.is_position() && space.shape.z_order == 0) {
            return jet;
        }
        let mut e = vec![0u8; 4 * space.dim];
        e[space.var(group, k)] = 1;
        let idx = space.index_of(&e).expect("linear monomial present");
        jet.c[idx] = Complex64::new(1.0, 0.0);
        jet
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn valid(&self) -> Shape {
        self.valid
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.c
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Derivative value for a flat exponent vector (length `4n`), or `None`
    /// when it lies outside the exact region of this jet.
    pub fn derivative_at(&self, exps: &[u8]) -> Option<Complex64> {
        let deg: u8 = exps.iter().sum();
        let zdeg: u8 = exps[..2 * self.space.dim].iter().sum();
        if deg > self.valid.order || zdeg > self.valid.z_order {
            return None;
        }
        let idx = self.space.index_of(exps)?;
        let fact: f64 = exps.iter().map(|&e| factorial(e)).product();
        Some(self.c[idx] * fact)
    }

    fn with(&self, c: Vec<Complex64>, valid: Shape) -> Jet {
        let mut jet = Jet {
            space: Arc::clone(&self.space),
            c,
            valid,
        };
        jet.mask();
        jet
    }

    fn mask(&mut self) {
        if self.valid == self.space.shape {
            return;
        }
        let (o, z) = (self.valid.order, self.valid.z_order);
        for (i, c) in self.c.iter_mut().enumerate() {
            if self.space.deg[i] > o || self.space.zdeg[i] > z {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    fn check_space(&self, other: &Jet) {
        assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "jets from different spaces combined"
        );
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet {
            space: Arc::clone(&self.space),
            c: self.c.iter().map(|&x| x * s).collect(),
            valid: self.valid,
        }
    }

    pub fn add_constant(&self, s: Complex64) -> Jet {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    pub fn conj(&self) -> Jet {
        let mut c = vec![Complex64::new(0.0, 0.0); self.c.len()];
        for (i, &x) in self.c.iter().enumerate() {
            c[self.space.conj_perm[i] as usize] = x.conj();
        }
        Jet {
            space: Arc::clone(&self.space),
            c,
            valid: self.valid,
        }
    }

    /// Wirtinger derivative with respect to coordinate `(group, k)`.
    pub fn derivative(&self, group: Group, k: usize) -> Jet {
        let valid = self.valid.after_derivative(group);
        let table = &self.space.deriv[self.space.var(group, k)];
        let c = table
            .iter()
            .map(|&(src, factor)| {
                if src == ABSENT {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.c[src as usize] * factor
                }
            })
            .collect();
        self.with(c, valid)
    }

    fn mul_raw(&self, other: &Jet) -> Vec<Complex64> {
        let sp = &self.space;
        let mut out = vec![Complex64::new(0.0, 0.0); self.c.len()];
        for (i, &a) in self.c.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let (s, e) = (sp.mul_start[i] as usize, sp.mul_start[i + 1] as usize);
            for &(j, k) in &sp.mul_pairs[s..e] {
                let b = other.c[j as usize];
                if b.re != 0.0 || b.im != 0.0 {
                    out[k as usize] += a * b;
                }
            }
        }
        out
    }

    /// `f(self)` given the Taylor coefficients `f^(k)(a0)/k!` of `f` at the
    /// constant term.
    fn compose(&self, taylor: &[Complex64]) -> Jet {
        let mut nil = self.clone();
        nil.c[0] = Complex64::new(0.0, 0.0);
        let top = taylor.len() - 1;
        let mut acc = Jet::constant(&self.space, taylor[top]);
        acc.valid = self.valid;
        for k in (0..top).rev() {
            acc = &acc * &nil;
            acc.c[0] += taylor[k];
        }
        acc.valid = self.valid;
        acc.mask();
        acc
    }

    fn taylor_len(&self) -> usize {
        self.valid.order as usize + 1
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut t = Vec::with_capacity(self.taylor_len());
        let mut f = 1.0;
        for k in 0..self.taylor_len() {
            if k > 0 {
                f *= k as f64;
            }
            t.push(e / f);
        }
        self.compose(&t)
    }

    /// Principal logarithm; `None` when the constant term vanishes.
    pub fn ln(&self) -> Option<Jet> {
        let a0 = self.value();
        if is_zero(a0) {
            return None;
        }
        let mut t = vec![a0.ln()];
        let inv = 1.0 / a0;
        let mut p = Complex64::new(1.0, 0.0);
        for k in 1..self.taylor_len() {
            p *= inv;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t.push(p * (sign / k as f64));
        }
        Some(self.compose(&t))
    }

    /// Principal square root; `None` when the constant term vanishes.
    pub fn sqrt(&self) -> Option<Jet> {
        let a0 = self.value();
        if is_zero(a0) {
            return None;
        }
        let root = a0.sqrt();
        let inv = 1.0 / a0;
        let mut t = Vec::with_capacity(self.taylor_len());
        let mut binom = 1.0;
        let mut p = root;
        for k in 0..self.taylor_len() {
            if k > 0 {
                binom *= (0.5 - (k as f64 - 1.0)) / k as f64;
                p *= inv;
            }
            t.push(p * binom);
        }
        Some(self.compose(&t))
    }

    /// Multiplicative inverse; `None` when the constant term vanishes.
    pub fn recip(&self) -> Option<Jet> {
        let a0 = self.value();
        if is_zero(a0) {
            return None;
        }
        let inv = 1.0 / a0;
        let mut t = Vec::with_capacity(self.taylor_len());
        let mut p = inv;
        for k in 0..self.taylor_len() {
            if k > 0 {
                p *= -inv;
            }
            t.push(p);
        }
        Some(self.compose(&t))
    }

    pub fn powi(&self, exp: i32) -> Option<Jet> {
        if exp < 0 {
            return self.recip()?.powi(-exp);
        }
        let mut result = Jet::constant(&self.space, Complex64::new(1.0, 0.0));
        result.valid = self.valid;
        let mut base = self.clone();
        let mut e = exp as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Some(result)
    }
}

fn is_zero(z: Complex64) -> bool {
    z.norm() < f64::MIN_POSITIVE
}

pub(crate) fn factorial(e: u8) -> f64 {
    (1..=e as u32).map(|k| k as f64).product()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check_space(rhs);
        let c = self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect();
        self.with(c, self.valid.meet(rhs.valid))
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check_space(rhs);
        let c = self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect();
        self.with(c, self.valid.meet(rhs.valid))
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check_space(rhs);
        let c = self.mul_raw(rhs);
        self.with(c, self.valid.meet(rhs.valid))
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn space_sizes_match_binomial_counts() {
        // n = 1: four variables; total degree <= 2, z-degree <= 1.
        let sp = JetSpace::get(1, Shape::new(2, 1));
        // deg 0: 1, deg 1: 4, deg 2 with zdeg <= 1: 10 - 3 = 7.
        assert_eq!(sp.len(), 12);
        let full = JetSpace::get(2, Shape::new(5, 5));
        assert_eq!(full.len(), 1287);
    }

    #[test]
    fn abs2_derivatives() {
        let sp = JetSpace::get(1, Shape::new(3, 1));
        let eta = Jet::variable(&sp, Group::Eta, 0, c(0.3, -0.7));
        let f = &eta * &eta.conj();
        let d = f.derivative(Group::Eta, 0);
        assert!((d.value() - c(0.3, 0.7)).norm() < 1e-15);
        let dd = d.derivative(Group::EtaBar, 0);
        assert!((dd.value() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn exp_log_sqrt_recip_compose_consistently() {
        let sp = JetSpace::get(1, Shape::new(5, 1));
        let x = Jet::variable(&sp, Group::Eta, 0, c(0.8, 0.1));
        let y = &x * &x.conj();
        let back = y.exp().ln().unwrap();
        for (a, b) in back.coefficients().iter().zip(y.coefficients()) {
            assert!((a - b).norm() < 1e-13);
        }
        let s = y.sqrt().unwrap();
        let sq = &s * &s;
        for (a, b) in sq.coefficients().iter().zip(y.coefficients()) {
            assert!((a - b).norm() < 1e-13);
        }
        let one = &y * &y.recip().unwrap();
        assert!((one.value() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(one.coefficients()[1..].iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn derivative_shrinks_validity() {
        let sp = JetSpace::get(2, Shape::new(5, 1));
        let z = Jet::variable(&sp, Group::Z, 1, c(0.2, 0.0));
        let d = z.derivative(Group::Z, 1);
        assert_eq!(d.valid(), Shape::new(4, 0));
        let e = z.derivative(Group::Eta, 0);
        assert_eq!(e.valid(), Shape::new(4, 1));
    }

    #[test]
    fn third_derivative_of_cube() {
        let sp = JetSpace::get(1, Shape::new(4, 0));
        let x = Jet::variable(&sp, Group::Eta, 0, c(0.5, 0.5));
        let f = x.powi(3).unwrap();
        let exps = [0, 0, 3, 0];
        assert!((f.derivative_at(&exps).unwrap() - c(6.0, 0.0)).norm() < 1e-13);
        let g = x.powi(-1).unwrap();
        // d/dx x^-1 = -x^-2
        let want = -(c(0.5, 0.5).powi(-2));
        assert!((g.derivative_at(&[0, 0, 1, 0]).unwrap() - want).norm() < 1e-13);
    }
}
