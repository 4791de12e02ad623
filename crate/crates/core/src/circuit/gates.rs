use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Entry-wise tolerance used when checking `U†U = I`.
pub const UNITARITY_TOL: f64 = 1e-12;

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// `e^{iδ} - 1`, exactly zero when `δ == 0`.
#[inline]
pub(crate) fn phase_excess(delta: f64) -> C64 {
    if delta == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        cis(delta) - 1.0
    }
}

/// A 2×2 single-particle gate, stored row-major: `m[row][col] = ⟨row|G|col⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleGate {
    m: [[C64; 2]; 2],
}

impl SingleGate {
    /// Builds a gate after checking unitarity.
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self> {
        let g = SingleGate { m };
        let deviation = g.unitarity_deviation();
        if !deviation.is_finite() || deviation > UNITARITY_TOL {
            return Err(Error::NonUnitaryGate {
                layer: 0,
                particle: 0,
                deviation,
            });
        }
        Ok(g)
    }

    pub(crate) fn new_unchecked(m: [[C64; 2]; 2]) -> Self {
        SingleGate { m }
    }

    pub fn identity() -> Self {
        Self::diagonal(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn hadamard() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        SingleGate {
            m: [[h, h], [h, -h]],
        }
    }

    pub fn pauli_x() -> Self {
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        SingleGate {
            m: [[z, o], [o, z]],
        }
    }

    /// Real rotation `[[cos θ, -sin θ], [sin θ, cos θ]]`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        SingleGate {
            m: [
                [C64::new(c, 0.0), C64::new(-s, 0.0)],
                [C64::new(s, 0.0), C64::new(c, 0.0)],
            ],
        }
    }

    /// `diag(1, e^{iα})`.
    pub fn z_phase(alpha: f64) -> Self {
        Self::diagonal(C64::new(1.0, 0.0), cis(alpha))
    }

    pub(crate) fn diagonal(d0: C64, d1: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        SingleGate {
            m: [[d0, z], [z, d1]],
        }
    }

    /// Matrix element `⟨row|G|col⟩`.
    #[inline]
    pub fn entry(&self, row: u8, col: u8) -> C64 {
        self.m[row as usize][col as usize]
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        self.m
    }

    #[inline]
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &SingleGate) -> SingleGate {
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        SingleGate { m: out }
    }

    pub fn dagger(&self) -> SingleGate {
        let m = &self.m;
        SingleGate {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    /// Max entry-wise deviation of `G†G` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.dagger().compose(self);
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.m[i][j] - target).norm());
            }
        }
        worst
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let id = SingleGate::identity();
        (0..2).all(|i| (0..2).all(|j| (self.m[i][j] - id.m[i][j]).norm() <= tol))
    }
}

/// Diagonal two-particle gate `diag(e^{iθ₁}, e^{iθ₂}, e^{iθ₃}, e^{iθ₄})` on joint modes
/// `(0,0), (0,1), (1,0), (1,1)` of the ordered pair `(first, second)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseGate {
    first: usize,
    second: usize,
    thetas: [f64; 4],
}

impl PhaseGate {
    pub fn new(first: usize, second: usize, thetas: [f64; 4]) -> Result<Self> {
        if first >= second {
            return Err(Error::InvalidPair {
                a: first,
                b: second,
            });
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite {
                layer: 0,
                what: format!("phase angles on pair ({first}, {second})"),
            });
        }
        Ok(PhaseGate {
            first,
            second,
            thetas,
        })
    }

    /// The controlled-Z gate `diag(1, 1, 1, -1)`.
    pub fn cz(first: usize, second: usize) -> Result<Self> {
        Self::new(first, second, [0.0, 0.0, 0.0, std::f64::consts::PI])
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.first, self.second)
    }

    pub fn thetas(&self) -> [f64; 4] {
        self.thetas
    }

    pub fn involves(&self, particle: usize) -> bool {
        self.first == particle || self.second == particle
    }

    pub fn connects(&self, a: usize, b: usize) -> bool {
        (self.first, self.second) == (a.min(b), a.max(b))
    }

    /// Partner of `particle` in this gate, if it is a member.
    pub fn other(&self, particle: usize) -> Option<usize> {
        if particle == self.first {
            Some(self.second)
        } else if particle == self.second {
            Some(self.first)
        } else {
            None
        }
    }

    /// Angle applied when `first` is in `mode_first` and `second` in `mode_second`.
    #[inline]
    pub fn angle(&self, mode_first: u8, mode_second: u8) -> f64 {
        self.thetas[2 * mode_first as usize + mode_second as usize]
    }

    /// Angle applied given the modes of two named members, in either order.
    #[inline]
    pub fn angle_for(&self, a: usize, mode_a: u8, mode_b: u8) -> f64 {
        if a == self.first {
            self.angle(mode_a, mode_b)
        } else {
            self.angle(mode_b, mode_a)
        }
    }

    /// Single-particle diagonal gate seen by the partner of `controller` when the
    /// controller sits in `mode`.
    pub fn condition(&self, controller: usize, mode: u8) -> Result<ConditionedPhase> {
        if mode > 1 {
            return Err(Error::InvalidMode(mode));
        }
        let target = self.other(controller).ok_or(Error::ControllerNotInPair {
            controller,
            a: self.first,
            b: self.second,
        })?;
        let angles = if controller == self.first {
            [self.angle(mode, 0), self.angle(mode, 1)]
        } else {
            [self.angle(0, mode), self.angle(1, mode)]
        };
        Ok(ConditionedPhase { target, angles })
    }

    /// Splits the gate into a global phase, local Z phases and a residual CZ angle.
    pub fn factor(&self) -> PhaseFactors {
        let [t1, t2, t3, t4] = self.thetas;
        PhaseFactors {
            global: cis(t1),
            local_first: t3 - t1,
            local_second: t2 - t1,
            residual: t1 + t4 - t2 - t3,
        }
    }

    /// The four diagonal entries.
    pub fn diagonal(&self) -> [C64; 4] {
        self.thetas.map(cis)
    }
}

/// Result of conditioning a phase gate on one member's mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionedPhase {
    pub target: usize,
    pub angles: [f64; 2],
}

impl ConditionedPhase {
    pub fn gate(&self) -> SingleGate {
        SingleGate::diagonal(cis(self.angles[0]), cis(self.angles[1]))
    }
}

/// `diag(e^{iθ}) = global · (Z_{local_first} ⊗ Z_{local_second}) · CZ_{residual}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseFactors {
    pub global: C64,
    pub local_first: f64,
    pub local_second: f64,
    pub residual: f64,
}

impl PhaseFactors {
    /// Multiplies the factors back out into the four diagonal entries.
    pub fn reconstruct(&self) -> [C64; 4] {
        let za = [C64::new(1.0, 0.0), cis(self.local_first)];
        let zb = [C64::new(1.0, 0.0), cis(self.local_second)];
        let cz = [
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            cis(self.residual),
        ];
        std::array::from_fn(|idx| self.global * za[idx / 2] * zb[idx % 2] * cz[idx])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn hadamard_is_unitary() {
        assert!(SingleGate::hadamard().unitarity_deviation() < 1e-15);
        assert!(SingleGate::new(SingleGate::hadamard().matrix()).is_ok());
    }

    #[test]
    fn column_norm_two_is_rejected() {
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        let err = SingleGate::new([[o, z], [z, C64::new(2.0, 0.0)]]).unwrap_err();
        assert!(matches!(err, Error::NonUnitaryGate { .. }));
    }

    #[test]
    fn condition_cz_on_first() {
        let g = PhaseGate::cz(0, 1).unwrap();
        let c0 = g.condition(0, 0).unwrap().gate();
        assert!(c0.is_identity(1e-15));
        let c1 = g.condition(0, 1).unwrap().gate();
        assert!(close(c1.entry(0, 0), C64::new(1.0, 0.0)));
        assert!(close(c1.entry(1, 1), C64::new(-1.0, 0.0)));
    }

    #[test]
    fn condition_zero_thetas_is_identity() {
        let g = PhaseGate::new(1, 2, [0.0; 4]).unwrap();
        for controller in [1, 2] {
            for mode in 0..2 {
                assert!(g
                    .condition(controller, mode)
                    .unwrap()
                    .gate()
                    .is_identity(0.0));
            }
        }
    }

    #[test]
    fn condition_rejects_outsider() {
        let g = PhaseGate::cz(0, 2).unwrap();
        assert!(matches!(
            g.condition(1, 0),
            Err(Error::ControllerNotInPair { .. })
        ));
    }

    #[test]
    fn conditioning_reassembles_gate() {
        let g = PhaseGate::new(0, 1, [0.3, -1.1, 2.0, 0.7]).unwrap();
        let diag = g.diagonal();
        // controller = first: |m⟩⟨m| ⊗ diag(cond_m)
        for m in 0..2u8 {
            let cond = g.condition(0, m).unwrap().gate();
            for b in 0..2u8 {
                assert!(close(cond.entry(b, b), diag[2 * m as usize + b as usize]));
            }
        }
        // controller = second
        for m in 0..2u8 {
            let cond = g.condition(1, m).unwrap().gate();
            for a in 0..2u8 {
                assert!(close(cond.entry(a, a), diag[2 * a as usize + m as usize]));
            }
        }
    }

    #[test]
    fn factor_of_cz_and_identity() {
        let f = PhaseGate::cz(0, 1).unwrap().factor();
        assert_eq!(f.global, C64::new(1.0, 0.0));
        assert_eq!((f.local_first, f.local_second, f.residual), (0.0, 0.0, PI));
        let f = PhaseGate::new(0, 1, [0.0; 4]).unwrap().factor();
        assert_eq!((f.local_first, f.local_second, f.residual), (0.0, 0.0, 0.0));
    }

    #[test]
    fn factor_reconstructs_generic_angles() {
        let g = PhaseGate::new(0, 1, [PI / 3.0, PI / 5.0, PI / 7.0, PI / 2.0]).unwrap();
        let rebuilt = g.factor().reconstruct();
        for (a, b) in rebuilt.iter().zip(g.diagonal()) {
            assert!(close(*a, b));
        }
    }

    #[test]
    fn pair_must_be_ascending() {
        assert!(PhaseGate::new(1, 0, [0.0; 4]).is_err());
        assert!(PhaseGate::new(1, 1, [0.0; 4]).is_err());
    }
}
