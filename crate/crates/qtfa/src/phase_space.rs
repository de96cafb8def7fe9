//! Finite phase space `Z_L x Z_L`: points, separable lattices, the symplectic
//! form and the cocycles of the finite Heisenberg group.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// `e^{2 pi i k / L}` with `k` reduced mod `L` first, so equal exponents give
/// bitwise equal values.
pub fn root_of_unity(k: i64, order: usize) -> Complex64 {
    let l = order as i64;
    let r = k.rem_euclid(l);
    if 4 * r % l == 0 {
        return match 4 * r / l {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, TAU * r as f64 / l as f64)
}

/// The inverse of 2 modulo an odd order.
pub fn half_of(order: usize) -> Result<i64> {
    if order % 2 == 0 {
        return Err(Error::EvenOrderUnsupported { order, operation: "halving" });
    }
    Ok(((order + 1) / 2) as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhasePoint {
    pub m: usize,
    pub n: usize,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { m: 0, n: 0 };

    pub fn new(m: i64, n: i64, order: usize) -> Self {
        let l = order as i64;
        PhasePoint { m: m.rem_euclid(l) as usize, n: n.rem_euclid(l) as usize }
    }

    pub fn add(self, other: PhasePoint, order: usize) -> Self {
        PhasePoint { m: (self.m + other.m) % order, n: (self.n + other.n) % order }
    }

    pub fn sub(self, other: PhasePoint, order: usize) -> Self {
        PhasePoint { m: (self.m + order - other.m) % order, n: (self.n + order - other.n) % order }
    }

    pub fn neg(self, order: usize) -> Self {
        PhasePoint { m: (order - self.m) % order, n: (order - self.n) % order }
    }

    pub fn scale(self, k: i64, order: usize) -> Self {
        PhasePoint::new(k * self.m as i64, k * self.n as i64, order)
    }

    pub fn index(self, order: usize) -> usize {
        self.m * order + self.n
    }

    /// Product `m n` of the canonical representatives.
    pub fn product(self) -> i64 {
        (self.m * self.n) as i64
    }
}

impl fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

/// All `L^2` points of the phase space in row-major order.
pub fn all_points(order: usize) -> impl Iterator<Item = PhasePoint> {
    (0..order).flat_map(move |m| (0..order).map(move |n| PhasePoint { m, n }))
}

/// `Omega(z, z') = m' n - m n'`.
pub fn symplectic_form(z: PhasePoint, w: PhasePoint) -> i64 {
    w.m as i64 * z.n as i64 - z.m as i64 * w.n as i64
}

/// `Ph(z) = e^{2 pi i h m n / L}`, the finite chirp.
pub fn chirp(z: PhasePoint, order: usize) -> Result<Complex64> {
    let h = half_of(order)?;
    Ok(root_of_unity(h * z.product(), order))
}

/// Finite stand-in for `e^{pi i m n}` on lattice points: the chirp for odd
/// orders, the sign `(-1)^{mn}` for even orders.
pub fn half_phase(z: PhasePoint, order: usize) -> Complex64 {
    if order % 2 == 1 {
        root_of_unity(((order as i64 + 1) / 2) * z.product(), order)
    } else if z.product() % 2 == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(-1.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CocycleKind {
    /// `c(z1, z2) = e^{-2 pi i m1 n2 / L}`
    Heisenberg,
    /// The complex conjugate of the Heisenberg cocycle.
    Conjugate,
    /// `e^{2 pi i h (m2 n1 - m1 n2) / L}`, odd orders only.
    Symmetric,
}

pub fn cocycle(kind: CocycleKind, z1: PhasePoint, z2: PhasePoint, order: usize) -> Result<Complex64> {
    let l = order as i64;
    let k = match kind {
        CocycleKind::Heisenberg => -(z1.m as i64 * z2.n as i64),
        CocycleKind::Conjugate => z1.m as i64 * z2.n as i64,
        CocycleKind::Symmetric => {
            let h = half_of(order).map_err(|_| Error::EvenOrderUnsupported {
                order,
                operation: "symmetric cocycle",
            })?;
            h * (symplectic_form(z1, z2) % l)
        }
    };
    Ok(root_of_unity(k, order))
}

/// The separable lattice `a Z_L x b Z_L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FiniteLattice {
    order: usize,
    a: usize,
    b: usize,
}

pub fn make_lattice(order: usize, a: usize, b: usize) -> Result<FiniteLattice> {
    FiniteLattice::new(order, a, b)
}

pub fn adjoint_lattice(lattice: &FiniteLattice) -> FiniteLattice {
    lattice.adjoint()
}

pub fn covolume(lattice: &FiniteLattice) -> Rational {
    lattice.covolume()
}

pub fn half_lattice(lattice: &FiniteLattice) -> Result<FiniteLattice> {
    lattice.half()
}

pub fn lattice_points(lattice: &FiniteLattice) -> Vec<PhasePoint> {
    lattice.points()
}

impl FiniteLattice {
    pub fn new(order: usize, a: usize, b: usize) -> Result<Self> {
        if order < 2 || a == 0 || b == 0 {
            return Err(Error::InvalidLattice { order, a, b });
        }
        if order % a != 0 || order % b != 0 {
            return Err(Error::NonDivisor { order, a, b });
        }
        Ok(FiniteLattice { order, a, b })
    }

    /// Every separable lattice of the given order, ordered by `(a, b)`.
    pub fn all(order: usize) -> Vec<FiniteLattice> {
        let divisors: Vec<usize> = (1..=order).filter(|d| order % d == 0).collect();
        divisors
            .iter()
            .flat_map(|&a| divisors.iter().map(move |&b| FiniteLattice { order, a, b }))
            .collect()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn triple(&self) -> [usize; 3] {
        [self.order, self.a, self.b]
    }

    pub fn point_count(&self) -> usize {
        (self.order / self.a) * (self.order / self.b)
    }

    pub fn covolume(&self) -> Rational {
        Rational::new((self.a * self.b) as i64, self.order as i64)
    }

    pub fn covolume_f64(&self) -> f64 {
        (self.a * self.b) as f64 / self.order as f64
    }

    pub fn adjoint(&self) -> FiniteLattice {
        FiniteLattice { order: self.order, a: self.order / self.b, b: self.order / self.a }
    }

    pub fn half(&self) -> Result<FiniteLattice> {
        if self.order % 2 == 1 {
            // 2^{-1} is an automorphism of Z_L, so it fixes every subgroup.
            Ok(*self)
        } else if self.a % 2 == 0 && self.b % 2 == 0 {
            Ok(FiniteLattice { order: self.order, a: self.a / 2, b: self.b / 2 })
        } else {
            Err(Error::Unhalvable { order: self.order, a: self.a, b: self.b })
        }
    }

    pub fn points(&self) -> Vec<PhasePoint> {
        let (l, a, b) = (self.order, self.a, self.b);
        (0..l)
            .step_by(a)
            .flat_map(|m| (0..l).step_by(b).map(move |n| PhasePoint { m, n }))
            .collect()
    }

    pub fn contains(&self, z: PhasePoint) -> bool {
        z.m % self.a == 0 && z.n % self.b == 0
    }

    /// Position of `z` in [`FiniteLattice::points`].
    pub fn index_of(&self, z: PhasePoint) -> Option<usize> {
        if !self.contains(z) || z.m >= self.order || z.n >= self.order {
            return None;
        }
        Some((z.m / self.a) * (self.order / self.b) + z.n / self.b)
    }

    /// The generators `(a, 0)` and `(0, b)`.
    pub fn generators(&self) -> [PhasePoint; 2] {
        [
            PhasePoint::new(self.a as i64, 0, self.order),
            PhasePoint::new(0, self.b as i64, self.order),
        ]
    }
}

impl fmt::Display for FiniteLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.order, self.a, self.b)
    }
}

impl Serialize for FiniteLattice {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.triple().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FiniteLattice {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [l, a, b] = <[usize; 3]>::deserialize(deserializer)?;
        FiniteLattice::new(l, a, b).map_err(serde::de::Error::custom)
    }
}
