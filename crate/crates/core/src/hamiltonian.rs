//! Effective spin-orbit Hamiltonian of one manifold (ground or excited) of a
//! group-IV color center, and its exact block diagonalization.
//!
//! In frequency units (GHz) the Hamiltonian of a manifold in a defect-frame
//! magnetic field **B** is
//!
//! ```text
//! H = −λ L̂z Ŝz + (μB/h) f L̂z Bz + (μB/h) gS Ŝ·B + 2 (μB/h) δf Ŝz Bz
//! ```
//!
//! written in the product basis {|e₊↑⟩, |e₊↓⟩, |e₋↑⟩, |e₋↓⟩}, where e± are
//! the Lz = ±1 orbital states and ↑/↓ the Sz = ±½ spin states. The
//! spin-orbit sign is negative: states with aligned orbital and spin angular
//! momentum form the lower branch. Every term is diagonal or identity in the
//! orbital index, so H is block-diagonal in Lz and each 2×2 spin block is
//! solved in closed form.

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::DefectFrameField;

/// Electronic parity of a manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    /// Even (gerade); the ground manifold for the negatively charged centers.
    Gerade,
    /// Odd (ungerade); the excited manifold.
    Ungerade,
}

impl Parity {
    pub fn label(self) -> &'static str {
        match self {
            Parity::Gerade => "ground",
            Parity::Ungerade => "excited",
        }
    }
}

/// Spin-orbit and orbital-Zeeman constants of one manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldParameters {
    pub parity: Parity,
    /// Spin-orbit constant λ, GHz. Strictly positive.
    pub lambda_so_ghz: f64,
    /// Orbital Zeeman factor f (dimensionless).
    pub f: f64,
    /// Spin-Zeeman correction factor δf (dimensionless).
    pub delta_f: f64,
}

impl ManifoldParameters {
    pub fn new(
        parity: Parity,
        lambda_so_ghz: f64,
        f: f64,
        delta_f: f64,
    ) -> Result<Self, HamiltonianError> {
        let p = Self {
            parity,
            lambda_so_ghz,
            f,
            delta_f,
        };
        p.validate()?;
        Ok(p)
    }

    /// SnV⁻ ground-manifold defaults: λ = 850 GHz, f = 0.154, δf = 0.014.
    pub fn snv_ground() -> Self {
        Self {
            parity: Parity::Gerade,
            lambda_so_ghz: 850.0,
            f: 0.154,
            delta_f: 0.014,
        }
    }

    /// SnV⁻ excited-manifold defaults: λ = 3000 GHz, f = 0.098, δf = 0.238.
    pub fn snv_excited() -> Self {
        Self {
            parity: Parity::Ungerade,
            lambda_so_ghz: 3000.0,
            f: 0.098,
            delta_f: 0.238,
        }
    }

    pub fn validate(&self) -> Result<(), HamiltonianError> {
        if !(self.lambda_so_ghz.is_finite() && self.lambda_so_ghz > 0.0) {
            return Err(HamiltonianError::InvalidParameter {
                name: "lambda_so_ghz",
                value: self.lambda_so_ghz,
                constraint: "finite and > 0",
            });
        }
        for (name, value) in [("f", self.f), ("delta_f", self.delta_f)] {
            if !value.is_finite() {
                return Err(HamiltonianError::InvalidParameter {
                    name,
                    value,
                    constraint: "finite",
                });
            }
        }
        Ok(())
    }

    /// Parameters with both orbital factors (f, δf) multiplied by `scale`.
    /// Both are proportional to the orbital g-factor, so a g-factor
    /// calibration scales them jointly.
    pub fn scaled_orbital(&self, scale: f64) -> Self {
        Self {
            f: self.f * scale,
            delta_f: self.delta_f * scale,
            ..*self
        }
    }
}

/// Physical constants entering the Zeeman terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Bohr magneton over Planck constant, GHz per Tesla.
    pub mu_b_over_h_ghz_per_t: f64,
    /// Electron spin g-factor.
    pub g_s: f64,
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<(), HamiltonianError> {
        if !(self.mu_b_over_h_ghz_per_t.is_finite() && self.mu_b_over_h_ghz_per_t > 0.0) {
            return Err(HamiltonianError::InvalidParameter {
                name: "mu_b_over_h_ghz_per_t",
                value: self.mu_b_over_h_ghz_per_t,
                constraint: "finite and > 0",
            });
        }
        if !(self.g_s.is_finite() && (1.9..=2.1).contains(&self.g_s)) {
            return Err(HamiltonianError::InvalidParameter {
                name: "g_s",
                value: self.g_s,
                constraint: "within [1.9, 2.1]",
            });
        }
        Ok(())
    }
}

impl Default for PhysicalConstants {
    /// μB/h = 13.996245 GHz/T and gS = 2.0023.
    fn default() -> Self {
        Self {
            mu_b_over_h_ghz_per_t: 13.996245,
            g_s: 2.0023,
        }
    }
}

/// Orbital index of a basis/eigen state: Lz eigenvalue ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orbital {
    /// Lz = +1 (|e₊⟩).
    EPlus,
    /// Lz = −1 (|e₋⟩).
    EMinus,
}

impl Orbital {
    pub const BOTH: [Self; 2] = [Self::EPlus, Self::EMinus];

    pub fn lz(self) -> f64 {
        match self {
            Orbital::EPlus => 1.0,
            Orbital::EMinus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Orbital::EPlus => "e+",
            Orbital::EMinus => "e-",
        }
    }
}

/// Spin-orbit branch of a manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Lower,
    Upper,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Lower => "lower",
            Branch::Upper => "upper",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("parameter {name} = {value} violates constraint: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error(
        "branch assignment ambiguous: intra-branch Zeeman splitting {splitting_ghz} GHz \
         exceeds half the spin-orbit constant ({lambda_so_ghz} GHz / 2)"
    )]
    BranchAmbiguity {
        splitting_ghz: f64,
        lambda_so_ghz: f64,
    },
    #[error("magnetic field has non-finite components")]
    NonFiniteField,
}

/// 4×4 manifold Hamiltonian in GHz, block-diagonal in the orbital index.
///
/// Built by [`build_hamiltonian`]; Hermitian and traceless by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldHamiltonian {
    matrix: [[Complex64; 4]; 4],
}

impl ManifoldHamiltonian {
    pub fn matrix(&self) -> &[[Complex64; 4]; 4] {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.matrix[i][i]).sum()
    }

    /// Largest `|H[i][j] − conj(H[j][i])|` over all element pairs.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.matrix[i][j] - self.matrix[j][i].conj()).norm());
            }
        }
        worst
    }

    /// The 2×2 spin block of one orbital sector, ordered (↑, ↓).
    pub fn block(&self, orbital: Orbital) -> [[Complex64; 2]; 2] {
        let o = match orbital {
            Orbital::EPlus => 0,
            Orbital::EMinus => 2,
        };
        [
            [self.matrix[o][o], self.matrix[o][o + 1]],
            [self.matrix[o + 1][o], self.matrix[o + 1][o + 1]],
        ]
    }

    /// Frobenius norm, GHz.
    pub fn frobenius_norm(&self) -> f64 {
        self.matrix
            .iter()
            .flatten()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Assemble the manifold Hamiltonian at a defect-frame field, in GHz.
pub fn build_hamiltonian(
    params: &ManifoldParameters,
    constants: &PhysicalConstants,
    field: &DefectFrameField,
) -> Result<ManifoldHamiltonian, HamiltonianError> {
    params.validate()?;
    constants.validate()?;
    if !(field.b_z.is_finite() && field.b_perp.is_finite() && field.phi.is_finite()) {
        return Err(HamiltonianError::NonFiniteField);
    }

    let mu = constants.mu_b_over_h_ghz_per_t;
    let (bx, by, bz) = field.components();
    // Off-diagonal spin element ⟨↑| gS (Sx Bx + Sy By) |↓⟩ = gS (Bx − iBy)/2.
    let c = Complex64::new(
        mu * constants.g_s * bx / 2.0,
        -mu * constants.g_s * by / 2.0,
    );

    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (block, orbital) in Orbital::BOTH.iter().enumerate() {
        let l = orbital.lz();
        let o = 2 * block;
        for (row, s) in [0.5_f64, -0.5].iter().enumerate() {
            // −λ l s + (μB/h)(f l + gS s + 2 δf s) Bz
            let diag = -params.lambda_so_ghz * l * s
                + mu * (params.f * l + (constants.g_s + 2.0 * params.delta_f) * s) * bz;
            m[o + row][o + row] = Complex64::new(diag, 0.0);
        }
        m[o][o + 1] = c;
        m[o + 1][o] = c.conj();
    }
    Ok(ManifoldHamiltonian { matrix: m })
}

/// One eigenstate of a manifold Hamiltonian.
///
/// Eigenstates of the block-diagonal Hamiltonian are exact products
/// |e_orbital⟩ ⊗ |spin⟩; only the 2-component spin part varies with field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenState {
    pub energy_ghz: f64,
    pub orbital: Orbital,
    pub branch: Branch,
    /// Spin amplitudes (↑, ↓), normalized, dominant component real ≥ 0.
    pub spin: [Complex64; 2],
}

impl EigenState {
    /// The full 4-component eigenvector in the product basis
    /// {|e₊↑⟩, |e₊↓⟩, |e₋↑⟩, |e₋↓⟩}.
    pub fn full_vector(&self) -> [Complex64; 4] {
        let mut v = [Complex64::new(0.0, 0.0); 4];
        let o = match self.orbital {
            Orbital::EPlus => 0,
            Orbital::EMinus => 2,
        };
        v[o] = self.spin[0];
        v[o + 1] = self.spin[1];
        v
    }
}

/// Sorted eigen-decomposition of one manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// States in ascending energy order.
    states: [EigenState; 4],
}

impl EigenSystem {
    /// States in ascending energy order.
    pub fn states(&self) -> &[EigenState; 4] {
        &self.states
    }

    pub fn energies(&self) -> [f64; 4] {
        [
            self.states[0].energy_ghz,
            self.states[1].energy_ghz,
            self.states[2].energy_ghz,
            self.states[3].energy_ghz,
        ]
    }

    /// The two states of one branch, ascending in energy.
    pub fn branch_states(&self, branch: Branch) -> [&EigenState; 2] {
        let mut found = self.states.iter().filter(|s| s.branch == branch);
        let a = found.next().expect("branch always has two states");
        let b = found.next().expect("branch always has two states");
        [a, b]
    }

    /// The state with the given orbital index within the given branch.
    pub fn state(&self, orbital: Orbital, branch: Branch) -> &EigenState {
        self.states
            .iter()
            .find(|s| s.orbital == orbital && s.branch == branch)
            .expect("every (orbital, branch) pair is populated")
    }
}

/// Spin eigenvectors of one 2×2 block.
///
/// For the traceless part [[Δ, c], [c̄, −Δ]] with r = √(Δ² + |c|²), the
/// eigenvector pair is chosen so that the dominant amplitude is real and
/// positive; at c = 0 this reduces to the Sz basis, making zero-field output
/// deterministic.
fn block_spin_states(delta: f64, c: Complex64) -> ([Complex64; 2], [Complex64; 2]) {
    let r = delta.hypot(c.norm());
    if delta >= 0.0 {
        let n = ((r + delta) * (r + delta) + c.norm_sqr()).sqrt();
        let upper = [Complex64::new((r + delta) / n, 0.0), c.conj() / n];
        let lower = [-c / n, Complex64::new((r + delta) / n, 0.0)];
        (lower, upper)
    } else {
        let n = ((r - delta) * (r - delta) + c.norm_sqr()).sqrt();
        let upper = [c / n, Complex64::new((r - delta) / n, 0.0)];
        let lower = [Complex64::new((r - delta) / n, 0.0), -c.conj() / n];
        (lower, upper)
    }
}

/// Diagonalize a manifold Hamiltonian by exact 2×2 block diagonalization.
///
/// The two lowest energies form the lower spin-orbit branch. This assignment
/// is valid while intra-branch Zeeman splittings stay below λ/2; beyond that
/// the function fails with [`HamiltonianError::BranchAmbiguity`] rather than
/// returning silently mislabeled branches.
pub fn eigensystem(
    h: &ManifoldHamiltonian,
    params: &ManifoldParameters,
) -> Result<EigenSystem, HamiltonianError> {
    let mut levels: Vec<EigenState> = Vec::with_capacity(4);
    for orbital in Orbital::BOTH {
        let b = h.block(orbital);
        let a = b[0][0].re;
        let d = b[1][1].re;
        let c = b[0][1];
        let mid = 0.5 * (a + d);
        let delta = 0.5 * (a - d);
        let r = delta.hypot(c.norm());
        let (spin_lower, spin_upper) = block_spin_states(delta, c);
        // Branch labels are provisional here; fixed after global sorting.
        levels.push(EigenState {
            energy_ghz: mid - r,
            orbital,
            branch: Branch::Lower,
            spin: spin_lower,
        });
        levels.push(EigenState {
            energy_ghz: mid + r,
            orbital,
            branch: Branch::Upper,
            spin: spin_upper,
        });
    }
    levels.sort_by(|x, y| x.energy_ghz.total_cmp(&y.energy_ghz));

    let mut states: [EigenState; 4] = [levels[0], levels[1], levels[2], levels[3]];
    states[0].branch = Branch::Lower;
    states[1].branch = Branch::Lower;
    states[2].branch = Branch::Upper;
    states[3].branch = Branch::Upper;

    let lower_split = states[1].energy_ghz - states[0].energy_ghz;
    let upper_split = states[3].energy_ghz - states[2].energy_ghz;
    let max_split = lower_split.max(upper_split);
    if max_split >= params.lambda_so_ghz / 2.0 {
        return Err(HamiltonianError::BranchAmbiguity {
            splitting_ghz: max_split,
            lambda_so_ghz: params.lambda_so_ghz,
        });
    }
    // Each branch must hold one state per orbital sector; if sorting mixed
    // the sectors the energy-order assignment is meaningless.
    if states[0].orbital == states[1].orbital {
        return Err(HamiltonianError::BranchAmbiguity {
            splitting_ghz: max_split,
            lambda_so_ghz: params.lambda_so_ghz,
        });
    }
    Ok(EigenSystem { states })
}

/// Zeeman splitting E_upper − E_lower within one branch, GHz. Zero at zero
/// field, nonnegative everywhere.
pub fn zeeman_sublevel_splitting(es: &EigenSystem, branch: Branch) -> f64 {
    let [lo, hi] = es.branch_states(branch);
    hi.energy_ghz - lo.energy_ghz
}

/// One branch-resolved eigenvalue with its sensitivity to a joint scale on
/// the orbital factors (f, δf).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledLevel {
    pub orbital: Orbital,
    pub branch: Branch,
    pub energy_ghz: f64,
    /// dE/dscale at the given scale, GHz.
    pub d_energy_d_scale: f64,
}

/// Branch-resolved eigenvalues when f and δf are both multiplied by `scale`,
/// together with the exact derivative of each eigenvalue with respect to the
/// scale.
///
/// Per orbital sector l the eigenvalues are E± = s·f·μ·l·Bz ± r with
/// r = √(Δ² + |c|²) and Δ = −λl/2 + μ(gS/2 + s·δf)Bz, so
/// dE±/ds = f·μ·l·Bz ± (Δ/r)·μ·δf·Bz. Used by the orbital g-factor
/// calibration fit, where it serves as the analytic Jacobian.
pub fn scaled_eigenvalues(
    params: &ManifoldParameters,
    constants: &PhysicalConstants,
    field: &DefectFrameField,
    scale: f64,
) -> Result<[ScaledLevel; 4], HamiltonianError> {
    let scaled = params.scaled_orbital(scale);
    let h = build_hamiltonian(&scaled, constants, field)?;
    let es = eigensystem(&h, &scaled)?;

    let mu = constants.mu_b_over_h_ghz_per_t;
    let bz = field.b_z;
    let c_abs = mu * constants.g_s * field.b_perp / 2.0;
    let mut out = [ScaledLevel {
        orbital: Orbital::EPlus,
        branch: Branch::Lower,
        energy_ghz: 0.0,
        d_energy_d_scale: 0.0,
    }; 4];
    for (slot, state) in es.states().iter().enumerate() {
        let l = state.orbital.lz();
        let delta = -params.lambda_so_ghz * l / 2.0
            + mu * (constants.g_s / 2.0 + scale * params.delta_f) * bz;
        let r = delta.hypot(c_abs);
        let sign = match state.branch {
            Branch::Lower => -1.0,
            Branch::Upper => 1.0,
        };
        // r > 0 always: at zero field Δ = ∓λ/2 and λ > 0.
        let d_r = (delta / r) * mu * params.delta_f * bz;
        out[slot] = ScaledLevel {
            orbital: state.orbital,
            branch: state.branch,
            energy_ghz: state.energy_ghz,
            d_energy_d_scale: mu * params.f * l * bz + sign * d_r,
        };
    }
    Ok(out)
}
