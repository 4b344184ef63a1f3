//! Truncated multivariate Taylor arithmetic ("jets") over real variables with
//! complex coefficients, plus Wirtinger derivative extraction.
//!
//! A [`Jet`] stores the Taylor coefficients of a real-analytic function of
//! `num_vars` real variables around a base point, up to a fixed total degree.
//! Every arithmetic operation is the exact truncation of the corresponding
//! formal power series, which makes jets an exact carrier of derivatives up to
//! that degree: no step sizes, no subtractive cancellation.
//!
//! The coefficient of the multi-index `a` is `(d^a f)(x0) / a!`, stored densely
//! in graded-lexicographic order (total degree first, then lexicographic with
//! the first variable largest). The table size is `C(num_vars + degree,
//! degree)`; at the sizes used here (<= 8 variables, degree <= 4) the dense
//! layout is at most 495 coefficients.
//!
//! Complex coordinates are laid out as consecutive real pairs: complex
//! variable `j` occupies real variables `2j` (real part) and `2j + 1`
//! (imaginary part). Wirtinger derivatives are linear combinations of the real
//! coefficient shifts: d/dz = (d/dx - i d/dy)/2 and d/dz^bar = (d/dx + i
//! d/dy)/2.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JetError {
    #[error("variable index {index} out of range for {num_vars} variables")]
    VariableOutOfRange { index: usize, num_vars: usize },
    #[error("requested derivative order {requested} exceeds truncation degree {degree}")]
    OrderExceedsDegree { requested: usize, degree: usize },
    #[error("jets have mismatched variable counts ({0} vs {1})")]
    MismatchedVariables(usize, usize),
    #[error("{op} of a jet whose constant term vanishes")]
    ZeroConstantTerm { op: &'static str },
    #[error("Wirtinger extraction requires an even number of real variables, got {0}")]
    OddVariableCount(usize),
    #[error("multi-index length {got} does not match {want} complex variables")]
    BadMultiIndexLength { got: usize, want: usize },
}

/// Precomputed lookup tables for one `(num_vars, degree)` pair.
///
/// Shared behind an `Arc` by every jet with that shape; built once and cached
/// globally. Multi-index positions are consistent across degrees (the first
/// `C(num_vars + d, d)` entries of a higher-degree table are exactly the
/// degree-`d` table), which is what makes truncation a prefix copy.
pub struct IndexTable {
    num_vars: usize,
    degree: usize,
    indices: Vec<Vec<u8>>,
    position: HashMap<Vec<u8>, u32>,
    /// `(a, b, a + b)` position triples for every unordered pair `a <= b` of
    /// multi-indices whose total degrees sum to at most `degree`. One pass
    /// over this list is a full truncated Cauchy product; accumulating the
    /// two cross terms of a pair together makes the product bitwise
    /// commutative.
    products: Vec<(u32, u32, u32)>,
    /// `shift_up[v * len + p]`: position of `indices[p] + e_v`, or `u32::MAX`
    /// when the bump would exceed the degree.
    shift_up: Vec<u32>,
}

fn generate_block(num_vars: usize, remaining: usize, var: usize, cur: &mut [u8], out: &mut Vec<Vec<u8>>) {
    if var == num_vars - 1 {
        cur[var] = remaining as u8;
        out.push(cur.to_vec());
        cur[var] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        cur[var] = a as u8;
        generate_block(num_vars, remaining - a, var + 1, cur, out);
        cur[var] = 0;
    }
}

impl IndexTable {
    fn build(num_vars: usize, degree: usize) -> Self {
        assert!(num_vars >= 1, "jets need at least one variable");
        let mut indices = Vec::new();
        let mut cur = vec![0u8; num_vars];
        for d in 0..=degree {
            generate_block(num_vars, d, 0, &mut cur, &mut indices);
        }
        let position: HashMap<Vec<u8>, u32> = indices
            .iter()
            .enumerate()
            .map(|(p, idx)| (idx.clone(), p as u32))
            .collect();

        let total_degree = |idx: &[u8]| idx.iter().map(|&x| x as usize).sum::<usize>();

        let mut products = Vec::new();
        for (pa, a) in indices.iter().enumerate() {
            let da = total_degree(a);
            for (pb, b) in indices.iter().enumerate().skip(pa) {
                if da + total_degree(b) > degree {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((pa as u32, pb as u32, position[&sum]));
            }
        }

        let len = indices.len();
        let mut shift_up = vec![u32::MAX; num_vars * len];
        for (p, idx) in indices.iter().enumerate() {
            if total_degree(idx) == degree {
                continue;
            }
            for v in 0..num_vars {
                let mut up = idx.clone();
                up[v] += 1;
                shift_up[v * len + p] = position[&up];
            }
        }

        Self { num_vars, degree, indices, position, products, shift_up }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

static TABLE_CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<IndexTable>>>> = OnceLock::new();

fn table(num_vars: usize, degree: usize) -> Arc<IndexTable> {
    let cache = TABLE_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("index table cache poisoned");
    map.entry((num_vars, degree))
        .or_insert_with(|| Arc::new(IndexTable::build(num_vars, degree)))
        .clone()
}

/// Truncated Taylor expansion of a function of `num_vars` real variables.
#[derive(Clone)]
pub struct Jet {
    table: Arc<IndexTable>,
    coeffs: Vec<Complex64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Jet(vars={}, deg={}, c0={})", self.num_vars(), self.degree(), self.constant_term())
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Jet {
    /// Jet of a constant function.
    pub fn constant(value: Complex64, num_vars: usize, degree: usize) -> Self {
        let table = table(num_vars, degree);
        let mut coeffs = vec![ZERO; table.len()];
        coeffs[0] = value;
        Self { table, coeffs }
    }

    /// Jet of the coordinate function `x_index` at the given base value:
    /// constant term `base_value`, unit linear term, everything else zero.
    pub fn variable(
        index: usize,
        base_value: Complex64,
        num_vars: usize,
        degree: usize,
    ) -> Result<Self, JetError> {
        if index >= num_vars {
            return Err(JetError::VariableOutOfRange { index, num_vars });
        }
        let table = table(num_vars, degree);
        let mut coeffs = vec![ZERO; table.len()];
        coeffs[0] = base_value;
        if degree >= 1 {
            let mut e = vec![0u8; num_vars];
            e[index] = 1;
            coeffs[table.position[&e] as usize] = ONE;
        }
        Ok(Self { table, coeffs })
    }

    /// Jet of the holomorphic coordinate `z_j = x_{2j} + i y_{2j+1}` of a
    /// system of `num_complex` complex variables.
    pub fn complex_coordinate(
        j: usize,
        base: Complex64,
        num_complex: usize,
        degree: usize,
    ) -> Result<Self, JetError> {
        if j >= num_complex {
            return Err(JetError::VariableOutOfRange { index: j, num_vars: num_complex });
        }
        let x = Jet::variable(2 * j, Complex64::new(base.re, 0.0), 2 * num_complex, degree)?;
        let y = Jet::variable(2 * j + 1, Complex64::new(base.im, 0.0), 2 * num_complex, degree)?;
        Ok(&x + &y.scale(Complex64::new(0.0, 1.0)))
    }

    pub fn num_vars(&self) -> usize {
        self.table.num_vars
    }

    pub fn degree(&self) -> usize {
        self.table.degree
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Raw coefficient of a multi-index (the derivative divided by the
    /// factorial of the index).
    pub fn coeff(&self, multi_index: &[u8]) -> Option<Complex64> {
        self.table
            .position
            .get(multi_index)
            .map(|&p| self.coeffs[p as usize])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drop all coefficients of total degree above `degree`.
    pub fn truncate(&self, degree: usize) -> Self {
        if degree >= self.degree() {
            return self.clone();
        }
        let t = table(self.num_vars(), degree);
        let coeffs = self.coeffs[..t.len()].to_vec();
        Self { table: t, coeffs }
    }

    fn zero_like(&self) -> Self {
        Jet::constant(ZERO, self.num_vars(), self.degree())
    }

    fn one_like(&self) -> Self {
        Jet::constant(ONE, self.num_vars(), self.degree())
    }

    /// Align two jets onto a common table (same variable count required;
    /// degrees meet at the minimum, which keeps truncation exact).
    fn aligned(&self, rhs: &Jet) -> Result<(Jet, Jet), JetError> {
        if self.num_vars() != rhs.num_vars() {
            return Err(JetError::MismatchedVariables(self.num_vars(), rhs.num_vars()));
        }
        let d = self.degree().min(rhs.degree());
        Ok((self.truncate(d), rhs.truncate(d)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_constant(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// Pointwise complex conjugate of the function. Since the variables are
    /// real-valued, conjugating a Taylor expansion is exactly conjugating its
    /// coefficients; no index reflection is involved.
    pub fn conj(&self) -> Self {
        Self {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn try_mul(&self, rhs: &Jet) -> Result<Jet, JetError> {
        let (a, b) = self.aligned(rhs)?;
        let mut coeffs = vec![ZERO; a.table.len()];
        for &(pa, pb, pout) in &a.table.products {
            let (pa, pb, pout) = (pa as usize, pb as usize, pout as usize);
            if pa == pb {
                coeffs[pout] += a.coeffs[pa] * b.coeffs[pa];
            } else {
                coeffs[pout] += a.coeffs[pa] * b.coeffs[pb] + a.coeffs[pb] * b.coeffs[pa];
            }
        }
        Ok(Jet { table: a.table, coeffs })
    }

    /// Reciprocal 1/f via the geometric series in u = 1 - f/f(0).
    pub fn recip(&self) -> Result<Jet, JetError> {
        let c0 = self.constant_term();
        if c0.norm() == 0.0 {
            return Err(JetError::ZeroConstantTerm { op: "reciprocal" });
        }
        let u = &self.one_like() - &self.scale(ONE / c0); // u = 1 - f/c0, no constant term
        let mut acc = self.one_like();
        for _ in 0..self.degree() {
            acc = &self.one_like() + &u.try_mul(&acc)?;
        }
        Ok(acc.scale(ONE / c0))
    }

    pub fn try_div(&self, rhs: &Jet) -> Result<Jet, JetError> {
        self.try_mul(&rhs.recip()?)
    }

    /// Integer power by repeated squaring; negative exponents go through the
    /// reciprocal, so the constant term must not vanish in that case.
    pub fn powi(&self, n: i64) -> Result<Jet, JetError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = self.one_like();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.try_mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(result)
    }

    /// exp(f) = exp(f(0)) * sum over the nilpotent part, evaluated by Horner.
    pub fn exp(&self) -> Result<Jet, JetError> {
        let c0 = self.constant_term();
        let g = self.add_constant(-c0); // no constant term
        let one = self.one_like();
        let mut acc = one.clone();
        for k in (1..=self.degree()).rev() {
            acc = &one + &g.try_mul(&acc)?.scale(Complex64::new(1.0 / k as f64, 0.0));
        }
        Ok(acc.scale(c0.exp()))
    }

    /// log(f) via the principal branch at the constant term plus the
    /// alternating series in u = f/f(0) - 1.
    pub fn log(&self) -> Result<Jet, JetError> {
        let c0 = self.constant_term();
        if c0.norm() == 0.0 {
            return Err(JetError::ZeroConstantTerm { op: "log" });
        }
        let u = self.scale(ONE / c0).add_constant(-ONE);
        let mut total = self.zero_like();
        let mut upow = self.one_like();
        for k in 1..=self.degree() {
            upow = upow.try_mul(&u)?;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            total = &total + &upow.scale(Complex64::new(sign / k as f64, 0.0));
        }
        Ok(total.add_constant(c0.ln()))
    }

    /// Derivative with respect to one real variable, as a jet of one lower
    /// degree. Coefficient shift: the new coefficient of `a` is `(a_v + 1)`
    /// times the old coefficient of `a + e_v`.
    pub fn d_real(&self, var: usize) -> Result<Jet, JetError> {
        if var >= self.num_vars() {
            return Err(JetError::VariableOutOfRange { index: var, num_vars: self.num_vars() });
        }
        if self.degree() == 0 {
            return Err(JetError::OrderExceedsDegree { requested: 1, degree: 0 });
        }
        let new_deg = self.degree() - 1;
        let t = table(self.num_vars(), new_deg);
        let len = self.table.len();
        let mut coeffs = vec![ZERO; t.len()];
        for (p, c) in coeffs.iter_mut().enumerate() {
            let q = self.table.shift_up[var * len + p];
            let mult = (self.table.indices[p][var] + 1) as f64;
            *c = self.coeffs[q as usize] * mult;
        }
        Ok(Jet { table: t, coeffs })
    }

    /// Holomorphic Wirtinger derivative d/dz_j as a jet: (d/dx - i d/dy)/2.
    pub fn dz(&self, j: usize) -> Result<Jet, JetError> {
        self.wirtinger_shift(j, false)
    }

    /// Antiholomorphic Wirtinger derivative d/dz^bar_j as a jet.
    pub fn dzbar(&self, j: usize) -> Result<Jet, JetError> {
        self.wirtinger_shift(j, true)
    }

    fn wirtinger_shift(&self, j: usize, conjugated: bool) -> Result<Jet, JetError> {
        if self.num_vars() % 2 != 0 {
            return Err(JetError::OddVariableCount(self.num_vars()));
        }
        let dx = self.d_real(2 * j)?;
        let dy = self.d_real(2 * j + 1)?;
        let i_half = Complex64::new(0.0, if conjugated { 0.5 } else { -0.5 });
        Ok(&dx.scale(Complex64::new(0.5, 0.0)) + &dy.scale(i_half))
    }

    /// Mixed Wirtinger derivative value at the base point. `holo` and
    /// `antiholo` are multi-indices over the complex variables (length
    /// `num_vars / 2`); the total order must not exceed the degree.
    pub fn wirtinger(&self, holo: &[u8], antiholo: &[u8]) -> Result<Complex64, JetError> {
        if self.num_vars() % 2 != 0 {
            return Err(JetError::OddVariableCount(self.num_vars()));
        }
        let nc = self.num_vars() / 2;
        if holo.len() != nc || antiholo.len() != nc {
            return Err(JetError::BadMultiIndexLength {
                got: holo.len().max(antiholo.len()),
                want: nc,
            });
        }
        let order: usize = holo.iter().chain(antiholo).map(|&x| x as usize).sum();
        if order > self.degree() {
            return Err(JetError::OrderExceedsDegree { requested: order, degree: self.degree() });
        }
        let mut cur = self.clone();
        for j in 0..nc {
            for _ in 0..holo[j] {
                cur = cur.dz(j)?;
            }
            for _ in 0..antiholo[j] {
                cur = cur.dzbar(j)?;
            }
        }
        Ok(cur.constant_term())
    }

    pub fn approx_eq(&self, other: &Jet, tol: f64) -> bool {
        self.num_vars() == other.num_vars()
            && self.degree() == other.degree()
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| (a - b).norm() <= tol)
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let (a, b) = self
                    .aligned(rhs)
                    .expect("jet arithmetic on mismatched variable counts");
                Jet {
                    table: a.table.clone(),
                    coeffs: a
                        .coeffs
                        .iter()
                        .zip(&b.coeffs)
                        .map(|(x, y)| x $op y)
                        .collect(),
                }
            }
        }
    };
}

jet_binop!(Add, add, +);
jet_binop!(Sub, sub, -);

impl std::ops::Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.try_mul(rhs).expect("jet product on mismatched variable counts")
    }
}

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn table_size_is_binomial() {
        // C(num_vars + degree, degree)
        let cases = [(1, 4, 5), (2, 2, 6), (4, 4, 70), (8, 4, 495)];
        for (nv, d, want) in cases {
            assert_eq!(table(nv, d).len(), want, "nv={nv} d={d}");
        }
    }

    #[test]
    fn coordinate_jet_layout() {
        let j = Jet::variable(0, c(0.5, 0.0), 2, 2).unwrap();
        assert_eq!(j.coeff(&[0, 0]).unwrap(), c(0.5, 0.0));
        assert_eq!(j.coeff(&[1, 0]).unwrap(), c(1.0, 0.0));
        assert_eq!(j.coeff(&[0, 1]).unwrap(), c(0.0, 0.0));
        assert_eq!(j.coeff(&[2, 0]).unwrap(), c(0.0, 0.0));
        assert!(Jet::variable(3, c(0.0, 0.0), 2, 2).is_err());
    }

    #[test]
    fn exp_series_matches_hand_expansion() {
        // exp(x) around 0: 1, 1, 1/2, 1/6, 1/24
        let x = Jet::variable(0, c(0.0, 0.0), 1, 4).unwrap();
        let e = x.exp().unwrap();
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (k, w) in want.iter().enumerate() {
            assert_relative_eq!(e.coeff(&[k as u8]).unwrap().re, w, epsilon = 1e-15);
        }
    }

    #[test]
    fn log_inverts_exp() {
        let x = Jet::variable(0, c(0.3, 0.0), 1, 4).unwrap();
        let back = x.exp().unwrap().log().unwrap();
        assert!(back.approx_eq(&x, 1e-13));
    }

    #[test]
    fn product_against_hand_expanded_polynomial() {
        // f(x, y) = (x * y)^2 expanded at (1, 1).
        // With u = x - 1, v = y - 1: ((1+u)(1+v))^2 = 1 + 2u + 2v + u^2 + 4uv + v^2 + ...
        let x = Jet::variable(0, c(1.0, 0.0), 2, 2).unwrap();
        let y = Jet::variable(1, c(1.0, 0.0), 2, 2).unwrap();
        let f = (&x * &y).powi(2).unwrap();
        assert_relative_eq!(f.coeff(&[0, 0]).unwrap().re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(f.coeff(&[1, 0]).unwrap().re, 2.0, epsilon = 1e-15);
        assert_relative_eq!(f.coeff(&[0, 1]).unwrap().re, 2.0, epsilon = 1e-15);
        assert_relative_eq!(f.coeff(&[2, 0]).unwrap().re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(f.coeff(&[1, 1]).unwrap().re, 4.0, epsilon = 1e-15);
        assert_relative_eq!(f.coeff(&[0, 2]).unwrap().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn wirtinger_of_norm_square() {
        // f(z) = z z^bar: d/dz d/dz^bar f = 1 everywhere.
        let z0 = c(0.3, 0.2);
        let z = Jet::complex_coordinate(0, z0, 1, 2).unwrap();
        let f = &z * &z.conj();
        let d = f.wirtinger(&[1], &[1]).unwrap();
        assert_relative_eq!(d.re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(d.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn wirtinger_of_disk_metric_at_origin() {
        // f(z) = (1 - z z^bar)^{-2}: mixed (1;1) derivative at 0 equals 2.
        let z = Jet::complex_coordinate(0, c(0.0, 0.0), 1, 4).unwrap();
        let one = Jet::constant(c(1.0, 0.0), 2, 4);
        let f = (&one - &(&z * &z.conj())).powi(-2).unwrap();
        let d = f.wirtinger(&[1], &[1]).unwrap();
        assert_relative_eq!(d.re, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn holomorphic_function_has_no_antiholomorphic_derivative() {
        let z = Jet::complex_coordinate(0, c(0.7, -0.4), 1, 3).unwrap();
        let f = z.powi(2).unwrap();
        let d = f.wirtinger(&[0], &[1]).unwrap();
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn degree_meet_on_mixed_degrees() {
        let a = Jet::variable(0, c(1.0, 0.0), 2, 4).unwrap();
        let b = Jet::variable(1, c(2.0, 0.0), 2, 2).unwrap();
        let p = &a * &b;
        assert_eq!(p.degree(), 2);
        assert_relative_eq!(p.coeff(&[1, 1]).unwrap().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn order_above_degree_is_an_error() {
        let z = Jet::complex_coordinate(0, c(0.1, 0.1), 1, 2).unwrap();
        assert!(matches!(
            z.wirtinger(&[2], &[1]),
            Err(JetError::OrderExceedsDegree { .. })
        ));
    }

    #[test]
    fn conj_matches_pointwise_conjugation() {
        // On z^2 the conjugate jet must be the jet of z^bar^2.
        let z0 = c(0.4, -0.3);
        let z = Jet::complex_coordinate(0, z0, 1, 3).unwrap();
        let f = z.powi(2).unwrap().conj();
        let g = z.conj().powi(2).unwrap();
        assert!(f.approx_eq(&g, 1e-14));
        assert_relative_eq!(f.constant_term().re, (z0.conj() * z0.conj()).re, epsilon = 1e-15);
    }
}
