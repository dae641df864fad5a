use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result, TWO_PI};

/// Dense complex matrix used throughout the engine.
pub type CMatrix = DMatrix<Complex64>;

/// Default upper bound on the Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Truncated Hilbert space: one cavity mode with photon numbers `0..=n_max`
/// tensored with `n_emitters` two-level emitters.
///
/// Basis index of `|n; e_0 .. e_{N-1}>` is `n * 2^N + bits`, where bit `i`
/// of `bits` is set when emitter `i` is excited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertConfig {
    n_max: usize,
    n_emitters: usize,
}

impl HilbertConfig {
    pub fn new(n_max: usize, n_emitters: usize) -> Result<Self> {
        Self::with_cap(n_max, n_emitters, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(n_max: usize, n_emitters: usize, cap: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::Config(format!("n_max must be >= 1, got {n_max}")));
        }
        if n_emitters < 1 {
            return Err(Error::Config(format!("n_emitters must be >= 1, got {n_emitters}")));
        }
        let dim = 1usize
            .checked_shl(n_emitters as u32)
            .filter(|_| n_emitters < usize::BITS as usize)
            .and_then(|e| e.checked_mul(n_max + 1));
        match dim {
            Some(d) if d <= cap => Ok(Self { n_max, n_emitters }),
            _ => Err(Error::Config(format!(
                "Hilbert dimension 2^{n_emitters} x {} exceeds cap {cap}",
                n_max + 1
            ))),
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_emitters(&self) -> usize {
        self.n_emitters
    }

    pub fn emitter_dim(&self) -> usize {
        1 << self.n_emitters
    }

    pub fn dim(&self) -> usize {
        self.emitter_dim() * (self.n_max + 1)
    }

    /// Basis index for `photons` in the cavity and excitation bit pattern `bits`.
    pub fn index(&self, photons: usize, bits: usize) -> usize {
        debug_assert!(photons <= self.n_max && bits < self.emitter_dim());
        photons * self.emitter_dim() + bits
    }

    fn split(&self, index: usize) -> (usize, usize) {
        (index / self.emitter_dim(), index % self.emitter_dim())
    }

    /// Cavity annihilation operator `a`.
    pub fn annihilation(&self) -> CMatrix {
        let d = self.dim();
        let mut a = CMatrix::zeros(d, d);
        for col in 0..d {
            let (n, bits) = self.split(col);
            if n > 0 {
                a[(self.index(n - 1, bits), col)] = Complex64::new((n as f64).sqrt(), 0.0);
            }
        }
        a
    }

    /// Lowering operator `σ⁻` of emitter `i`.
    pub fn lowering(&self, i: usize) -> CMatrix {
        assert!(i < self.n_emitters, "emitter index {i} out of range");
        let d = self.dim();
        let mask = 1 << i;
        let mut s = CMatrix::zeros(d, d);
        for col in 0..d {
            let (n, bits) = self.split(col);
            if bits & mask != 0 {
                s[(self.index(n, bits & !mask), col)] = Complex64::new(1.0, 0.0);
            }
        }
        s
    }

    /// `σ_z = |e><e| - |g><g|` of emitter `i`.
    pub fn sigma_z(&self, i: usize) -> CMatrix {
        assert!(i < self.n_emitters, "emitter index {i} out of range");
        let mask = 1 << i;
        CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r != c {
                Complex64::new(0.0, 0.0)
            } else if self.split(r).1 & mask != 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(-1.0, 0.0)
            }
        })
    }

    /// Photon-number operator `a†a` (diagonal).
    pub fn photon_number(&self) -> CMatrix {
        CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c {
                Complex64::new(self.split(r).0 as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Excited-state projector `σ⁺σ⁻` of emitter `i`.
    pub fn excited_population(&self, i: usize) -> CMatrix {
        assert!(i < self.n_emitters, "emitter index {i} out of range");
        let mask = 1 << i;
        CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c && self.split(r).1 & mask != 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// Physical parameters, all in ordinary-frequency units (GHz, ν = ω/2π).
///
/// `kappa` and the emitter linewidth are FWHM energy-decay rates. The total
/// emitter linewidth is `gamma_rad + 2 gamma_deph` and is never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub g: f64,
    pub kappa: f64,
    /// Fraction of `kappa` leaking into the waveguide (the measured channel).
    pub kappa_wg_fraction: f64,
    pub gamma_rad: f64,
    pub gamma_deph: f64,
    /// Cavity detuning from the rotating frame, (ν_c - ν_frame).
    pub delta_c: f64,
    /// Emitter detuning from the rotating frame, (ν_a - ν_frame).
    pub delta_a: f64,
    pub omega_drive: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 0.0,
            kappa: 0.0,
            kappa_wg_fraction: 1.0,
            gamma_rad: 0.0,
            gamma_deph: 0.0,
            delta_c: 0.0,
            delta_a: 0.0,
            omega_drive: 0.0,
        }
    }
}

impl SystemParams {
    pub fn new(g: f64, kappa: f64, gamma_rad: f64) -> Self {
        Self { g, kappa, gamma_rad, ..Self::default() }
    }

    /// Total emitter FWHM linewidth, `gamma_rad + 2 gamma_deph`.
    pub fn gamma_total(&self) -> f64 {
        self.gamma_rad + 2.0 * self.gamma_deph
    }

    /// Intrinsic (non-waveguide) part of the cavity loss.
    pub fn kappa_loss(&self) -> f64 {
        (1.0 - self.kappa_wg_fraction) * self.kappa
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("kappa_wg_fraction", self.kappa_wg_fraction),
            ("gamma_rad", self.gamma_rad),
            ("gamma_deph", self.gamma_deph),
            ("delta_c", self.delta_c),
            ("delta_a", self.delta_a),
            ("omega_drive", self.omega_drive),
        ];
        if let Some((name, v)) = all.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} is not finite ({v})")));
        }
        for (name, v) in
            [("kappa", self.kappa), ("gamma_rad", self.gamma_rad), ("gamma_deph", self.gamma_deph)]
        {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.kappa_wg_fraction) {
            return Err(Error::InvalidParams(format!(
                "kappa_wg_fraction must lie in [0, 1], got {}",
                self.kappa_wg_fraction
            )));
        }
        Ok(())
    }
}

/// A collapse operator `L` with its rate (rad/ns).
#[derive(Debug, Clone)]
pub struct CollapseOp {
    pub op: CMatrix,
    pub rate: f64,
}

/// Hamiltonian plus collapse operators, in angular units (rad/ns).
#[derive(Debug, Clone)]
pub struct LindbladSystem {
    dim: usize,
    hamiltonian: CMatrix,
    collapse_ops: Vec<CollapseOp>,
    // H - (i/2) Σ r L†L
    h_eff: CMatrix,
    // √r L, zero-rate channels dropped
    jumps: Vec<CMatrix>,
    config: Option<HilbertConfig>,
}

impl LindbladSystem {
    /// Assemble a system from an arbitrary Hermitian `hamiltonian` and
    /// collapse channels. Rates are in rad/ns.
    pub fn new(hamiltonian: CMatrix, collapse_ops: Vec<CollapseOp>) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if hamiltonian.ncols() != dim {
            return Err(Error::ShapeMismatch {
                expected: dim,
                rows: hamiltonian.nrows(),
                cols: hamiltonian.ncols(),
            });
        }
        let herm_err = (&hamiltonian - hamiltonian.adjoint()).norm();
        if herm_err > 1e-12 * hamiltonian.norm().max(1.0) {
            return Err(Error::InvalidParams(format!(
                "Hamiltonian is not Hermitian (|H - H†| = {herm_err:e})"
            )));
        }
        for c in &collapse_ops {
            if c.op.nrows() != dim || c.op.ncols() != dim {
                return Err(Error::ShapeMismatch { expected: dim, rows: c.op.nrows(), cols: c.op.ncols() });
            }
            if !(c.rate >= 0.0 && c.rate.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "collapse rate must be finite and >= 0, got {}",
                    c.rate
                )));
            }
        }

        let half_i = Complex64::new(0.0, 0.5);
        let mut h_eff = hamiltonian.clone();
        let mut jumps = Vec::new();
        for c in collapse_ops.iter().filter(|c| c.rate > 0.0) {
            let ldl = c.op.adjoint() * &c.op;
            h_eff -= ldl * (half_i * c.rate);
            jumps.push(&c.op * Complex64::new(c.rate.sqrt(), 0.0));
        }

        Ok(Self { dim, hamiltonian, collapse_ops, h_eff, jumps, config: None })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn collapse_ops(&self) -> &[CollapseOp] {
        &self.collapse_ops
    }

    /// The Hilbert configuration, when built through [`build_system`].
    pub fn config(&self) -> Option<&HilbertConfig> {
        self.config.as_ref()
    }

    pub fn is_dissipative(&self) -> bool {
        !self.jumps.is_empty()
    }

    pub(crate) fn h_eff(&self) -> &CMatrix {
        &self.h_eff
    }

    pub(crate) fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    /// Largest collapse rate, rad/ns.
    pub fn max_rate(&self) -> f64 {
        self.collapse_ops.iter().map(|c| c.rate).fold(0.0, f64::max)
    }
}

/// Build the rotating-frame Jaynes-Cummings (one emitter) or Tavis-Cummings
/// (several identical emitters) open system.
///
/// `H/2π = Δc a†a + Σ Δa σ⁺σ⁻ + g Σ (a†σ⁻ + aσ⁺) + (Ω/2)(a† + a)`; collapse
/// channels are `a` at `2πκ`, each `σ⁻` at `2πγ_rad` and each `σ_z` at
/// `2πγ_deph/2`, so that the optical coherence decays at half the total
/// FWHM `γ_rad + 2γ_deph`.
pub fn build_system(config: HilbertConfig, params: &SystemParams) -> Result<LindbladSystem> {
    params.validate()?;
    let d = config.dim();
    let a = config.annihilation();
    let a_dag = a.adjoint();
    let c = |x: f64| Complex64::new(TWO_PI * x, 0.0);

    let mut h = config.photon_number() * c(params.delta_c);
    h += (&a_dag + &a) * c(params.omega_drive / 2.0);

    let mut collapse = vec![CollapseOp { op: a.clone(), rate: TWO_PI * params.kappa }];
    for i in 0..config.n_emitters() {
        let sm = config.lowering(i);
        let sp = sm.adjoint();
        h += config.excited_population(i) * c(params.delta_a);
        h += (&a_dag * &sm + &a * &sp) * c(params.g);
        collapse.push(CollapseOp { op: sm, rate: TWO_PI * params.gamma_rad });
        collapse.push(CollapseOp { op: config.sigma_z(i), rate: TWO_PI * params.gamma_deph / 2.0 });
    }
    debug_assert_eq!(h.nrows(), d);

    let mut sys = LindbladSystem::new(h, collapse)?;
    sys.config = Some(config);
    Ok(sys)
}
