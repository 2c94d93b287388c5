//! Half-integer angular momentum algebra: Clebsch-Gordan coefficients,
//! Wigner 6j symbols and Wigner rotation matrices.
//!
//! Conventions used throughout this crate:
//!
//! * Clebsch-Gordan coefficients follow the Condon-Shortley phase
//!   convention, `clebsch_gordan(j1, m1, j2, m2, j, m)` = ⟨j1 m1; j2 m2 | j m⟩.
//! * Rotation matrices are `D^j_{m,m'}(psi, theta, phi)
//!   = exp(-i m psi) d^j_{m,m'}(theta) exp(-i m' phi)`, with the real
//!   `d^j` evaluated by the explicit Wigner sum formula so that
//!   `d^{1/2}_{1/2,1/2}(theta) = cos(theta/2)` and
//!   `d^{1/2}_{1/2,-1/2}(theta) = -sin(theta/2)`.
//!
//! Quantum numbers are stored as twice their value in an `i32`, which keeps
//! every triangle and parity check in exact integer arithmetic.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;
use std::sync::LazyLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An exact half-integer angular momentum quantum number.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };

    /// Builds the half-integer with value `twice / 2`.
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    /// Builds an integer-valued quantum number.
    pub const fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    /// Builds `numer / 2` from an odd numerator, e.g. `half(3)` is 3/2.
    pub const fn half(numer: i32) -> Self {
        HalfInt { twice: numer }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub const fn abs(self) -> Self {
        HalfInt {
            twice: self.twice.abs(),
        }
    }

    /// True when `m` differs from `self` by an integer, as a projection must.
    pub const fn parity_consistent(self, m: HalfInt) -> bool {
        (self.twice - m.twice) % 2 == 0
    }

    /// Triangle rule: |j1-j2| <= j3 <= j1+j2 with integer perimeter.
    pub fn triangle(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> bool {
        (j1.twice + j2.twice + j3.twice) % 2 == 0
            && (j1.twice - j2.twice).abs() <= j3.twice
            && j3.twice <= j1.twice + j2.twice
    }

    /// The projections -j, -j+1, .., j.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> {
        let lowest = -self.twice;
        (0..self.twice + 1).map(move |k| HalfInt::from_twice(lowest + 2 * k))
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice + rhs.twice,
        }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice - rhs.twice,
        }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl Sum for HalfInt {
    fn sum<I: Iterator<Item = HalfInt>>(iter: I) -> HalfInt {
        iter.fold(HalfInt::ZERO, Add::add)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3/2"`, `"-1/2"`, `"2"`, `"1.5"` and `"-0.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parity(format!("`{s}` is not a half-integer"));
        if let Some((n, d)) = s.split_once('/') {
            if d.trim() != "2" {
                return Err(bad());
            }
            let n: i32 = n.trim().parse().map_err(|_| bad())?;
            return Ok(HalfInt::from_twice(n));
        }
        if let Ok(n) = s.parse::<i32>() {
            return Ok(HalfInt::from_int(n));
        }
        if let Ok(x) = s.parse::<f64>() {
            let twice = 2.0 * x;
            if twice.fract() == 0.0 && twice.abs() < 1e6 {
                return Ok(HalfInt::from_twice(twice as i32));
            }
        }
        Err(bad())
    }
}

/// Exact factorials 0!..34! converted to f64 once.
static FACTORIALS: LazyLock<[f64; 35]> = LazyLock::new(|| {
    let mut out = [0.0; 35];
    let mut acc: u128 = 1;
    out[0] = 1.0;
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        acc *= n as u128;
        *slot = acc as f64;
    }
    out
});

fn fact(n: i32) -> f64 {
    FACTORIALS[n as usize]
}

fn check_projection(name: &str, j: HalfInt, m: HalfInt) -> Result<()> {
    if !j.parity_consistent(m) {
        return Err(Error::Parity(format!("{name}: j={j}, m={m}")));
    }
    if m.abs() > j {
        return Err(Error::Projection(format!(
            "{name}: |m|={} exceeds j={j}",
            m.abs()
        )));
    }
    Ok(())
}

/// Clebsch-Gordan coefficient ⟨j1 m1; j2 m2 | j m⟩ (Condon-Shortley).
///
/// Returns exactly 0 when `m != m1 + m2` or the (j1, j2, j) triangle rule
/// fails; rejects projections of inconsistent half-integer parity.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<f64> {
    check_projection("clebsch_gordan j1", j1, m1)?;
    check_projection("clebsch_gordan j2", j2, m2)?;
    check_projection("clebsch_gordan j", j, m)?;
    if m1 + m2 != m || !HalfInt::triangle(j1, j2, j) {
        return Ok(0.0);
    }
    // Integer combinations entering the Racah sum, all exact.
    let c1 = (j1.twice() + j2.twice() - j.twice()) / 2;
    let c2 = (j1.twice() - j2.twice() + j.twice()) / 2;
    let c3 = (-j1.twice() + j2.twice() + j.twice()) / 2;
    let c4 = (j1.twice() + j2.twice() + j.twice()) / 2 + 1;
    let j1pm1 = (j1.twice() + m1.twice()) / 2;
    let j1mm1 = (j1.twice() - m1.twice()) / 2;
    let j2pm2 = (j2.twice() + m2.twice()) / 2;
    let j2mm2 = (j2.twice() - m2.twice()) / 2;
    let jpm = (j.twice() + m.twice()) / 2;
    let jmm = (j.twice() - m.twice()) / 2;

    let prefactor = f64::from(j.twice() + 1) * fact(c1) * fact(c2) * fact(c3) / fact(c4)
        * fact(jpm)
        * fact(jmm)
        * fact(j1mm1)
        * fact(j1pm1)
        * fact(j2mm2)
        * fact(j2pm2);

    let t_lo = 0
        .max((j2.twice() - j.twice() - m1.twice()) / 2)
        .max((j1.twice() - j.twice() + m2.twice()) / 2);
    let t_hi = c1.min(j1mm1).min(j2pm2);
    let mut sum = 0.0;
    for t in t_lo..=t_hi {
        let den = fact(t)
            * fact(c1 - t)
            * fact(j1mm1 - t)
            * fact(j2pm2 - t)
            * fact((j.twice() - j2.twice() + m1.twice()) / 2 + t)
            * fact((j.twice() - j1.twice() - m2.twice()) / 2 + t);
        sum += if t % 2 == 0 { 1.0 } else { -1.0 } / den;
    }
    Ok(sum * prefactor.sqrt())
}

fn triad_parity_ok(a: HalfInt, b: HalfInt, c: HalfInt) -> bool {
    (a.twice() + b.twice() + c.twice()) % 2 == 0
}

fn triangle_delta(a: HalfInt, b: HalfInt, c: HalfInt) -> f64 {
    let x1 = (a.twice() + b.twice() - c.twice()) / 2;
    let x2 = (a.twice() - b.twice() + c.twice()) / 2;
    let x3 = (-a.twice() + b.twice() + c.twice()) / 2;
    let x4 = (a.twice() + b.twice() + c.twice()) / 2 + 1;
    fact(x1) * fact(x2) * fact(x3) / fact(x4)
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}.
///
/// Triads of inconsistent half-integer parity are a domain error; a triad
/// that merely violates the triangle inequality gives 0.
pub fn wigner_6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> Result<f64> {
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    for (a, b, c) in triads {
        if !triad_parity_ok(a, b, c) {
            return Err(Error::Parity(format!(
                "6j triad ({a} {b} {c}) has non-integer perimeter"
            )));
        }
    }
    if !triads.iter().all(|&(a, b, c)| HalfInt::triangle(a, b, c)) {
        return Ok(0.0);
    }
    let pref = (triangle_delta(j1, j2, j3)
        * triangle_delta(j1, j5, j6)
        * triangle_delta(j4, j2, j6)
        * triangle_delta(j4, j5, j3))
    .sqrt();
    let s1 = (j1.twice() + j2.twice() + j3.twice()) / 2;
    let s2 = (j1.twice() + j5.twice() + j6.twice()) / 2;
    let s3 = (j4.twice() + j2.twice() + j6.twice()) / 2;
    let s4 = (j4.twice() + j5.twice() + j3.twice()) / 2;
    let q1 = (j1.twice() + j2.twice() + j4.twice() + j5.twice()) / 2;
    let q2 = (j2.twice() + j3.twice() + j5.twice() + j6.twice()) / 2;
    let q3 = (j1.twice() + j3.twice() + j4.twice() + j6.twice()) / 2;
    let t_lo = s1.max(s2).max(s3).max(s4);
    let t_hi = q1.min(q2).min(q3);
    let mut sum = 0.0;
    for t in t_lo..=t_hi {
        let term = fact(t + 1)
            / (fact(t - s1)
                * fact(t - s2)
                * fact(t - s3)
                * fact(t - s4)
                * fact(q1 - t)
                * fact(q2 - t)
                * fact(q3 - t));
        sum += if t % 2 == 0 { term } else { -term };
    }
    Ok(pref * sum)
}

/// Wigner small-d matrix element d^j_{m,mp}(theta) by the explicit sum formula.
pub fn wigner_small_d(j: HalfInt, m: HalfInt, mp: HalfInt, theta: f64) -> Result<f64> {
    check_projection("wigner_small_d m", j, m)?;
    check_projection("wigner_small_d mp", j, mp)?;
    Ok(small_d_unchecked(j, m, mp, theta))
}

/// d^j element without domain checks; out-of-range projections give 0.
pub(crate) fn small_d_unchecked(j: HalfInt, m: HalfInt, mp: HalfInt, theta: f64) -> f64 {
    if m.abs() > j || mp.abs() > j {
        return 0.0;
    }
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let jpm = (j.twice() + m.twice()) / 2;
    let jmm = (j.twice() - m.twice()) / 2;
    let jpmp = (j.twice() + mp.twice()) / 2;
    let jmmp = (j.twice() - mp.twice()) / 2;
    let mmmp = (m.twice() - mp.twice()) / 2;
    let pref = (fact(jpm) * fact(jmm) * fact(jpmp) * fact(jmmp)).sqrt();
    let t_lo = 0.max(-mmmp);
    let t_hi = jpmp.min(jmm);
    let mut out = 0.0;
    for t in t_lo..=t_hi {
        let den = fact(jpmp - t) * fact(t) * fact(mmmp + t) * fact(jmm - t);
        let cexp = jpmp + jmm - 2 * t;
        let sexp = mmmp + 2 * t;
        let sign = if (mmmp + t) % 2 == 0 { 1.0 } else { -1.0 };
        out += sign / den * c.powi(cexp) * s.powi(sexp);
    }
    pref * out
}

/// Full rotation matrix element
/// `D^j_{m,mp}(psi, theta, phi) = e^{-i m psi} d^j_{m,mp}(theta) e^{-i mp phi}`.
pub fn wigner_big_d(
    j: HalfInt,
    m: HalfInt,
    mp: HalfInt,
    psi: f64,
    theta: f64,
    phi: f64,
) -> Result<Complex64> {
    let d = wigner_small_d(j, m, mp, theta)?;
    let phase = Complex64::new(0.0, -(m.value() * psi + mp.value() * phi)).exp();
    Ok(phase * d)
}
