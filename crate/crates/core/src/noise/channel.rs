use crate::error::{Error, Result};
use crate::qsim::{GateKind, Matrix2, Matrix4, Op};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Single-qubit channel as a Kraus set.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub kraus: Vec<Matrix2>,
}

impl Channel {
    pub fn identity() -> Self {
        Self { kraus: vec![[[c(1.0), ZERO], [ZERO, c(1.0)]]] }
    }

    /// Largest entry of `Σ K†K − I`.
    pub fn completeness_error(&self) -> f64 {
        let mut sum = [[ZERO; 2]; 2];
        for k in &self.kraus {
            for (i, row) in sum.iter_mut().enumerate() {
                for (j, s) in row.iter_mut().enumerate() {
                    *s += k[0][i].conj() * k[0][j] + k[1][i].conj() * k[1][j];
                }
            }
        }
        let mut err: f64 = 0.0;
        for (i, row) in sum.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                err = err.max((s - id).norm());
            }
        }
        err
    }

    pub fn is_identity(&self) -> bool {
        self.kraus.len() == 1 && {
            let k = &self.kraus[0];
            (k[0][0] - 1.0).norm() < 1e-15
                && (k[1][1] - 1.0).norm() < 1e-15
                && k[0][1].norm() < 1e-15
                && k[1][0].norm() < 1e-15
        }
    }

    /// `ρ ↦ Σ K ρ K†` acting on a 2×2 density matrix.
    pub fn apply_to(&self, rho: &Matrix2) -> Matrix2 {
        let mut out = [[ZERO; 2]; 2];
        for k in &self.kraus {
            let kr = mul(k, rho);
            let kd = dagger(k);
            let krk = mul(&kr, &kd);
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] += krk[i][j];
                }
            }
        }
        out
    }

    /// Superoperator on `(row bit, column bit)` of a vectorized density
    /// matrix, local index `row + 2·col`.
    pub fn superoperator(&self) -> Matrix4 {
        let mut m = [[ZERO; 4]; 4];
        for k in &self.kraus {
            for rp in 0..2 {
                for cp in 0..2 {
                    for r in 0..2 {
                        for cc in 0..2 {
                            m[rp + 2 * cp][r + 2 * cc] += k[rp][r] * k[cp][cc].conj();
                        }
                    }
                }
            }
        }
        m
    }
}

pub(crate) fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub(crate) fn dagger(a: &Matrix2) -> Matrix2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Gate durations in seconds.
#[derive(Clone, Debug, PartialEq)]
pub struct Durations {
    pub one_qubit: f64,
    pub cx: f64,
}

impl Default for Durations {
    fn default() -> Self {
        Self { one_qubit: 35e-9, cx: 300e-9 }
    }
}

impl Durations {
    /// `(2·controls − 3)` CX times, at least one CX.
    pub fn mcx(&self, controls: usize) -> f64 {
        (2 * controls).saturating_sub(3).max(1) as f64 * self.cx
    }

    /// Loading `rows` codevectors into `width` qubits: `width · rows` CX.
    pub fn prepare(&self, width: usize, rows: usize) -> f64 {
        (width * rows) as f64 * self.cx
    }

    /// Reflection about the prepared state over `width` qubits built from
    /// `rows` codevectors per register: unprepare, zero-state reflection,
    /// prepare.
    pub fn reflect(&self, width: usize, rows: usize) -> f64 {
        2.0 * self.prepare(width, rows) + self.mcx(width) + 2.0 * self.one_qubit
    }

    pub fn of_kind(&self, kind: GateKind) -> Option<f64> {
        match kind {
            GateKind::OneQubit => Some(self.one_qubit),
            GateKind::Cx | GateKind::PhaseFlip => Some(self.cx),
            GateKind::Mcx { controls } => Some(self.mcx(controls)),
            GateKind::Prepare | GateKind::Reflect => None,
        }
    }

    /// Duration of one circuit step; `rows` is the codebook size `N`.
    pub fn of_op(&self, op: &Op, rows: usize) -> f64 {
        match op {
            Op::Gate(g) => self.of_kind(g.kind()).expect("gate kinds have fixed durations"),
            Op::Inject { span, rows: r } => self.prepare(span.len, r.len()),
            Op::Reflect(axis) => self.reflect(axis.span.len, rows),
        }
    }
}

/// Thermal relaxation plus optional flat error knobs.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseParams {
    pub t1: f64,
    pub t2: f64,
    pub durations: Durations,
    /// Depolarizing probability per touched qubit per gate (off by default).
    pub depolarizing: f64,
    /// Classical flip probability per measured bit (off by default).
    pub readout_flip: f64,
}

impl NoiseParams {
    /// `T2 = 2·T1`, default durations, other knobs off.
    pub fn thermal(t1: f64) -> Self {
        Self { t1, t2: 2.0 * t1, durations: Durations::default(), depolarizing: 0.0, readout_flip: 0.0 }
    }

    /// No noise at all.
    pub fn ideal() -> Self {
        Self::thermal(f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t1.is_nan() || self.t2.is_nan() || self.t1 <= 0.0 || self.t2 <= 0.0 {
            return Err(Error::Unphysical(format!("T1 = {}, T2 = {} must be > 0", self.t1, self.t2)));
        }
        if self.t2 > 2.0 * self.t1 {
            return Err(Error::Unphysical(format!("T2 = {} exceeds 2·T1 = {}", self.t2, 2.0 * self.t1)));
        }
        for (name, p) in [("depolarizing", self.depolarizing), ("readout_flip", self.readout_flip)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Unphysical(format!("{name} probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.t1.is_infinite() && self.t2.is_infinite() && self.depolarizing == 0.0 && self.readout_flip == 0.0
    }
}

/// Amplitude damping with `p1 = 1 − e^{−Δt/T1}` composed with pure dephasing
/// `pφ = 1 − e^{−Δt(1/T2 − 1/(2T1))}`.
pub fn relaxation_channel(params: &NoiseParams, duration: f64) -> Result<Channel> {
    params.validate()?;
    if duration.is_nan() || duration < 0.0 {
        return Err(Error::InvalidParameter(format!("duration {duration} must be >= 0")));
    }
    let p1 = -(-duration / params.t1).exp_m1();
    let rate_phi = 1.0 / params.t2 - 0.5 / params.t1;
    let p_phi = -(-duration * rate_phi.max(0.0)).exp_m1();
    if p1 == 0.0 && p_phi == 0.0 {
        return Ok(Channel::identity());
    }
    let q = p_phi / 2.0;
    let keep = (1.0 - p1).sqrt();
    Ok(Channel {
        kraus: vec![
            [[c((1.0 - q).sqrt()), ZERO], [ZERO, c((1.0 - q).sqrt() * keep)]],
            [[ZERO, c(p1.sqrt())], [ZERO, ZERO]],
            [[c(q.sqrt()), ZERO], [ZERO, c(-q.sqrt() * keep)]],
        ],
    })
}

/// `ρ ↦ (1 − p)ρ + p·I/2`.
pub fn depolarizing_channel(p: f64) -> Channel {
    if p == 0.0 {
        return Channel::identity();
    }
    let i = Complex64::new(0.0, 1.0);
    let a = c((1.0 - 0.75 * p).sqrt());
    let b = (p / 4.0).sqrt();
    Channel {
        kraus: vec![
            [[a, ZERO], [ZERO, a]],
            [[ZERO, c(b)], [c(b), ZERO]],
            [[ZERO, -i * b], [i * b, ZERO]],
            [[c(b), ZERO], [ZERO, c(-b)]],
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_limits() {
        let p = NoiseParams::ideal();
        assert!(relaxation_channel(&p, 1.0).unwrap().is_identity());
        assert!(relaxation_channel(&NoiseParams::thermal(1e-5), 0.0).unwrap().is_identity());
    }

    #[test]
    fn damping_probability_at_t1() {
        let params = NoiseParams::thermal(2e-5);
        let ch = relaxation_channel(&params, 2e-5).unwrap();
        let excited = [[ZERO, ZERO], [ZERO, c(1.0)]];
        let out = ch.apply_to(&excited);
        assert!((out[0][0].re - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((out[0][0].re - 0.6321).abs() < 1e-4);
    }

    #[test]
    fn coherence_decays_at_t2() {
        let params = NoiseParams { t2: 1.2e-5, ..NoiseParams::thermal(1e-5) };
        let dt = 3e-6;
        let plus = [[c(0.5), c(0.5)], [c(0.5), c(0.5)]];
        let out = relaxation_channel(&params, dt).unwrap().apply_to(&plus);
        assert!((out[0][1].re - 0.5 * (-dt / params.t2).exp()).abs() < 1e-12);
    }

    #[test]
    fn channels_compose_over_time() {
        let params = NoiseParams { t2: 1.5e-5, ..NoiseParams::thermal(1e-5) };
        let rho = [[c(0.3), Complex64::new(0.2, 0.1)], [Complex64::new(0.2, -0.1), c(0.7)]];
        let a = relaxation_channel(&params, 2e-6).unwrap();
        let b = relaxation_channel(&params, 5e-6).unwrap();
        let ab = relaxation_channel(&params, 7e-6).unwrap();
        let two = b.apply_to(&a.apply_to(&rho));
        let one = ab.apply_to(&rho);
        for i in 0..2 {
            for j in 0..2 {
                assert!((two[i][j] - one[i][j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_unphysical() {
        assert!(relaxation_channel(&NoiseParams { t2: 3.0, ..NoiseParams::thermal(1.0) }, 1.0).is_err());
        assert!(relaxation_channel(&NoiseParams::thermal(-1.0), 1.0).is_err());
        assert!(relaxation_channel(&NoiseParams::thermal(1.0), -1.0).is_err());
    }

    #[test]
    fn default_durations() {
        let d = Durations::default();
        assert_eq!(d.mcx(4), 5.0 * 300e-9);
        assert_eq!(d.prepare(8, 4), 32.0 * 300e-9);
        assert!((d.reflect(8, 4) - (64.0 + 13.0) * 300e-9 - 70e-9).abs() < 1e-18);
    }

    proptest! {
        #[test]
        fn kraus_completeness(t1 in 1e-7f64..1e-1, ratio in 0.01f64..2.0, dt in 0.0f64..1e-2) {
            let params = NoiseParams { t2: ratio * t1, ..NoiseParams::thermal(t1) };
            prop_assert!(relaxation_channel(&params, dt).unwrap().completeness_error() < 1e-12);
        }

        #[test]
        fn depolarizing_completeness(p in 0.0f64..1.0) {
            prop_assert!(depolarizing_channel(p).completeness_error() < 1e-12);
        }
    }
}
