//! Dense univariate polynomials over an arbitrary coefficient ring.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `c[0] + c[1] x + … + c[d] x^d`, kept without trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly<C> {
    coeffs: Vec<C>,
}

impl<C> Poly<C>
where
    C: Clone + Zero + One + PartialEq,
{
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    /// `c · x^degree`.
    pub fn monomial(c: C, degree: usize) -> Self {
        let mut coeffs = vec![C::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    pub fn x() -> Self {
        Self::monomial(C::one(), 1)
    }

    /// Ascending coefficients, no trailing zeros.
    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> C {
        self.coeffs.get(i).cloned().unwrap_or_else(C::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn pow(&self, n: usize) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    /// `q(x) = self(g(x))`.
    pub fn compose(&self, g: &Self) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * g) + &Self::constant(c.clone()))
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }
}

impl<C> Poly<C>
where
    C: Clone + Zero + One + PartialEq + Neg<Output = C>,
{
    /// `1 − x`.
    pub fn one_minus_x() -> Self {
        Self::new(vec![C::one(), -C::one()])
    }

    /// `q(x) = self(1 − x)`, i.e. rewrite a polynomial in `p` as one in `ε = 1 − p`.
    pub fn compose_one_minus(&self) -> Self {
        self.compose(&Self::one_minus_x())
    }
}

impl<C: Clone + Zero + One + PartialEq> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: Self) -> Poly<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<C: Clone + Zero + One + PartialEq + Neg<Output = C>> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: Self) -> Poly<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + -rhs.coeff(i)).collect())
    }
}

impl<C: Clone + Zero + One + PartialEq + Neg<Output = C>> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<C: Clone + Zero + One + PartialEq> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: Self) -> Poly<C> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl<C> $tr for Poly<C> where for<'a> &'a Poly<C>: $tr<Output = Poly<C>> {
            type Output = Poly<C>;
            fn $m(self, rhs: Self) -> Poly<C> { (&self).$m(&rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl<C: fmt::Display + Zero> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})p")?,
                _ => write!(f, "({c})p^{i}")?,
            }
        }
        Ok(())
    }
}

impl<C: fmt::Debug> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Poly").field(&self.coeffs).finish()
    }
}

/// Polynomial with exact rational coefficients.
pub type RationalPoly = Poly<BigRational>;

/// An exactly representable rational form of a binary float.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// `Σ a_i x^i / d` with integer `a_i`: evaluates without any gcd work.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerForm {
    coeffs: Vec<BigInt>,
    denom: BigInt,
}

impl IntegerForm {
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    /// `(numerator, denominator)` of the value at `x`, not reduced.
    fn raw(&self, x: &BigRational) -> (BigInt, BigInt) {
        let (num, den) = eval_integer_form(&self.coeffs, x.numer(), x.denom());
        (num, den * &self.denom)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let (num, den) = self.raw(x);
        BigRational::new(num, den)
    }

    pub fn sign_at(&self, x: &BigRational) -> Ordering {
        let (num, den) = self.raw(x);
        (sign_of(&num) * sign_of(&den)).cmp(&0)
    }

    /// Value at a float, computed exactly and rounded once.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let (num, den) = self.raw(&rational_from_f64(x));
        ratio_to_f64(&num, &den)
    }
}

/// Rounds `num / den` to the nearest float without reducing the fraction first.
pub fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    // Shift both to ~64 significant bits so the float division is accurate.
    let shift = |x: &BigInt| x.bits() as i64 - 64;
    let (sn, sd) = (shift(num).max(0), shift(den).max(0));
    let n = (num >> sn as usize).to_f64().unwrap_or(f64::NAN);
    let d = (den >> sd as usize).to_f64().unwrap_or(f64::NAN);
    (n / d) * 2f64.powi((sn - sd) as i32)
}

impl Poly<BigRational> {
    /// Clears denominators: `self = Σ a_i x^i / d`.
    pub fn integer_form(&self) -> IntegerForm {
        let denom = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let coeffs = self.coeffs.iter().map(|c| c.numer() * (&denom / c.denom())).collect();
        IntegerForm { coeffs, denom }
    }

    /// Integer coefficients, if every coefficient is an integer.
    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.coeffs.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect()
    }

    /// Exact value at a rational point.
    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.integer_form().eval(x)
    }

    /// Sign of the exact value at `x`.
    pub fn sign_at(&self, x: &BigRational) -> Ordering {
        self.integer_form().sign_at(x)
    }

    /// Value at a float, computed exactly and rounded once.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.integer_form().eval_f64(x)
    }

    /// Coefficients rounded to `f64`.
    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

fn sign_of(x: &BigInt) -> i8 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// Evaluates `Σ a_i (n/d)^i` as the fraction `(Σ a_i n^i d^(k−i), d^k)`.
fn eval_integer_form(ints: &[BigInt], n: &BigInt, d: &BigInt) -> (BigInt, BigInt) {
    if ints.is_empty() {
        return (BigInt::zero(), BigInt::one());
    }
    let k = ints.len() - 1;
    let mut dpows = Vec::with_capacity(k + 1);
    let mut dpow = BigInt::one();
    for _ in 0..=k {
        dpows.push(dpow.clone());
        dpow *= d;
    }
    // Homogeneous Horner: acc ← acc·n + a_i·d^(k−i).
    let mut acc = BigInt::zero();
    for (i, a) in ints.iter().enumerate().rev() {
        acc = acc * n + a * &dpows[k - i];
    }
    let den = dpows.pop().expect("k + 1 powers");
    (acc, den)
}

/// `p^(n−k) (1−p)^k` expanded over the monomial basis, for `k = 0..=n`.
pub fn pattern_basis(n: usize) -> Vec<Poly<BigInt>> {
    let one_minus: Poly<BigInt> = Poly::one_minus_x();
    (0..=n)
        .map(|k| &Poly::monomial(BigInt::one(), n - k) * &one_minus.pow(k))
        .collect()
}

/// Absolute value of a rational, convenience for tolerance checks.
pub fn abs_f64(x: &BigRational) -> f64 {
    x.abs().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn int_poly(c: &[i64]) -> RationalPoly {
        Poly::new(c.iter().map(|&x| q(x, 1)).collect())
    }

    #[test]
    fn arithmetic() {
        let a = int_poly(&[1, 1]);
        let b = int_poly(&[-1, 1]);
        assert_eq!(&a * &b, int_poly(&[-1, 0, 1]));
        assert_eq!(&a + &b, int_poly(&[0, 2]));
        assert_eq!(&a - &a, RationalPoly::zero());
        assert_eq!(a.compose_one_minus(), int_poly(&[2, -1]));
        assert_eq!((&a - &a).degree(), None);
    }

    #[test]
    fn closed_forms_evaluate() {
        let f = int_poly(&[0, 1, -2, 2]);
        assert_eq!(f.eval_rational(&q(1, 2)), q(1, 4));
        assert_eq!(f.eval_rational(&q(1, 1)), q(1, 1));
        let g = int_poly(&[0, 1, -4, 12, -16, 8]);
        assert_eq!(g.eval_rational(&q(1, 1)), q(1, 1));
        assert!((f.eval_f64(0.9) - 0.738).abs() < 1e-15);
    }

    #[test]
    fn binomial_identity() {
        let total = pattern_basis(5)
            .iter()
            .enumerate()
            .fold(Poly::<BigInt>::zero(), |acc, (k, b)| {
                let c: BigInt = (1..=k as u64).fold(BigInt::one(), |c, i| c * (5 - i + 1) / i);
                &acc + &b.scale(&c)
            });
        assert_eq!(total, Poly::one());
    }

    #[test]
    fn signs() {
        let f = int_poly(&[-1, 2]); // root at 1/2
        assert_eq!(f.sign_at(&q(1, 4)), Ordering::Less);
        assert_eq!(f.sign_at(&q(1, 2)), Ordering::Equal);
        assert_eq!(f.sign_at(&q(3, 4)), Ordering::Greater);
        let g = Poly::new(vec![q(1, 3), q(-1, 7)]);
        assert_eq!(g.eval_rational(&q(2, 1)), q(1, 21));
    }

    #[test]
    fn generic_over_floats() {
        let p = Poly::new(vec![1.0f64, -2.0, 1.0]);
        assert_eq!(p.eval(&3.0), 4.0);
        assert_eq!(p.compose_one_minus().coeffs(), &[0.0, 0.0, 1.0]);
    }
}
