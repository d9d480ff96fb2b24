//! Labeled optical transition tables between the ground and excited
//! manifolds, Zeeman sweeps with continuous line tracking, and the pairwise
//! drift-centering correction applied to four-line families.
//!
//! Families are labeled A, B, C, D in order of decreasing zero-field energy;
//! within a family, lines are numbered 0 to 3 in order of decreasing energy.
//! Offsets are relative to the electronic transition center (both manifolds'
//! energies sum to zero), not to the absolute optical frequency.

use std::fmt;

use thiserror::Error;

use crate::geometry::{field_in_defect_frame, DefectOrientation, LabVector};
use crate::hamiltonian::{
    build_hamiltonian, eigensystem, Branch, EigenSystem, HamiltonianError, ManifoldParameters,
    Orbital, PhysicalConstants,
};

/// Offsets closer than this merge into a single line (with at most four
/// lines per family this only triggers at exact degeneracies, i.e. B = 0).
pub const LINE_MERGE_TOL_GHZ: f64 = 1e-6;

/// Optical transition family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Upper excited branch → lower ground branch.
    A,
    /// Upper excited branch → upper ground branch.
    B,
    /// Lower excited branch → lower ground branch.
    C,
    /// Lower excited branch → upper ground branch.
    D,
}

impl Family {
    pub const ALL: [Self; 4] = [Self::A, Self::B, Self::C, Self::D];

    pub fn excited_branch(self) -> Branch {
        match self {
            Family::A | Family::B => Branch::Upper,
            Family::C | Family::D => Branch::Lower,
        }
    }

    pub fn ground_branch(self) -> Branch {
        match self {
            Family::A | Family::C => Branch::Lower,
            Family::B | Family::D => Branch::Upper,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.trim() {
            "A" | "a" => Some(Family::A),
            "B" | "b" => Some(Family::B),
            "C" | "c" => Some(Family::C),
            "D" | "d" => Some(Family::D),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Field-independent identity of one transition line: which excited and
/// ground sublevels it connects. The orbital index is an exact quantum
/// number of the block-diagonal Hamiltonian, so tracking by (family,
/// orbital, orbital) yields curves that are continuous in B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineKey {
    pub family: Family,
    pub orbital_excited: Orbital,
    pub orbital_ground: Orbital,
}

impl fmt::Display for LineKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}->{}]",
            self.family,
            self.orbital_excited.label(),
            self.orbital_ground.label()
        )
    }
}

/// One unmerged transition line with its tracking key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyedLine {
    pub key: LineKey,
    /// E_excited − E_ground, GHz, relative to the electronic center.
    pub offset_ghz: f64,
    /// Squared spin overlap |⟨χ_u|χ_g⟩|², in [0, 1].
    pub intensity: f64,
}

impl KeyedLine {
    pub fn spin_conserving(&self) -> bool {
        self.intensity > 0.5
    }
}

/// One labeled optical line of the merged per-field table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionLine {
    pub family: Family,
    /// Position within the family in order of decreasing energy. `None`
    /// when degenerate lines merged (zero field), leaving fewer than four.
    pub index: Option<u8>,
    pub offset_ghz: f64,
    /// Relative intensity in [0, 1]. For merged lines this is the summed
    /// overlap normalized per contributing excited sublevel, so a fully
    /// spin-conserving degenerate line reports 1.
    pub intensity: f64,
    pub spin_conserving: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransitionError {
    #[error("expected exactly {expected} values, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("values must be sorted in descending order")]
    NotSorted,
    #[error("values must be finite")]
    NonFinite,
    #[error("field list must be nonempty and strictly increasing")]
    BadFieldList,
    #[error("sweep direction must be a nonzero vector")]
    ZeroDirection,
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

/// All sixteen unmerged lines (four families × two excited × two ground
/// sublevels), in deterministic key order.
pub fn keyed_lines(ground: &EigenSystem, excited: &EigenSystem) -> Vec<KeyedLine> {
    let mut out = Vec::with_capacity(16);
    for family in Family::ALL {
        for orbital_excited in Orbital::BOTH {
            let u = excited.state(orbital_excited, family.excited_branch());
            for orbital_ground in Orbital::BOTH {
                let g = ground.state(orbital_ground, family.ground_branch());
                // Spin-part overlap; the dipole operator is treated as the
                // identity on the orbital factor, so only the spin overlap
                // discriminates lines.
                let overlap = u.spin[0].conj() * g.spin[0] + u.spin[1].conj() * g.spin[1];
                out.push(KeyedLine {
                    key: LineKey {
                        family,
                        orbital_excited,
                        orbital_ground,
                    },
                    offset_ghz: u.energy_ghz - g.energy_ghz,
                    intensity: overlap.norm_sqr().clamp(0.0, 1.0),
                });
            }
        }
    }
    out
}

/// Merge one family's keyed lines into the labeled table entries.
fn merge_family(lines: &[KeyedLine], family: Family) -> Vec<TransitionLine> {
    let mut members: Vec<&KeyedLine> = lines.iter().filter(|l| l.key.family == family).collect();
    members.sort_by(|a, b| b.offset_ghz.total_cmp(&a.offset_ghz));

    let mut groups: Vec<Vec<&KeyedLine>> = Vec::new();
    for line in members {
        match groups.last_mut() {
            Some(group)
                if (group.last().unwrap().offset_ghz - line.offset_ghz).abs()
                    <= LINE_MERGE_TOL_GHZ =>
            {
                group.push(line)
            }
            _ => groups.push(vec![line]),
        }
    }

    let full = groups.len() == 4;
    groups
        .iter()
        .enumerate()
        .map(|(i, group)| {
            let offset = group.iter().map(|l| l.offset_ghz).sum::<f64>() / group.len() as f64;
            let summed: f64 = group.iter().map(|l| l.intensity).sum();
            let mut excited: Vec<Orbital> = group.iter().map(|l| l.key.orbital_excited).collect();
            excited.sort();
            excited.dedup();
            // Normalizing per contributing excited sublevel keeps merged
            // intensities within [0, 1] (spin-basis completeness bounds the
            // per-sublevel sum by 1).
            let intensity = (summed / excited.len() as f64).clamp(0.0, 1.0);
            TransitionLine {
                family,
                index: if full { Some(i as u8) } else { None },
                offset_ghz: offset,
                intensity,
                spin_conserving: intensity > 0.5,
            }
        })
        .collect()
}

/// Labeled optical lines between two branch-resolved manifolds, for all four
/// families, each sorted by decreasing offset. Degenerate lines (offsets
/// within [`LINE_MERGE_TOL_GHZ`]) are merged.
pub fn transition_table(ground: &EigenSystem, excited: &EigenSystem) -> Vec<TransitionLine> {
    let keyed = keyed_lines(ground, excited);
    Family::ALL
        .iter()
        .flat_map(|&family| merge_family(&keyed, family))
        .collect()
}

/// Center a descending four-line family pairwise: the outer pair (positions
/// 0, 3) is shifted by the negative of its mean, the inner pair (positions
/// 1, 2) by the negative of its own mean. Removes any common-mode drift;
/// idempotent; each centered pair sums to zero by construction.
pub fn pairwise_center(four_offsets: &[f64]) -> Result<[f64; 4], TransitionError> {
    if four_offsets.len() != 4 {
        return Err(TransitionError::CountMismatch {
            expected: 4,
            got: four_offsets.len(),
        });
    }
    if four_offsets.iter().any(|v| !v.is_finite()) {
        return Err(TransitionError::NonFinite);
    }
    if four_offsets.windows(2).any(|w| w[0] < w[1]) {
        return Err(TransitionError::NotSorted);
    }
    let outer_mean = 0.5 * (four_offsets[0] + four_offsets[3]);
    let inner_mean = 0.5 * (four_offsets[1] + four_offsets[2]);
    Ok([
        four_offsets[0] - outer_mean,
        four_offsets[1] - inner_mean,
        four_offsets[2] - inner_mean,
        four_offsets[3] - outer_mean,
    ])
}

/// Metadata describing how a model sweep was generated.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMeta {
    pub orientation: DefectOrientation,
    /// Unit vector of the applied field in the crystal frame.
    pub direction: LabVector,
    pub ground: ManifoldParameters,
    pub excited: ManifoldParameters,
    pub constants: PhysicalConstants,
}

/// One tracked transition curve across a field sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedCurve {
    pub key: LineKey,
    /// Display label within the family (0..3, decreasing energy), assigned
    /// from the ordering at the highest sweep field where lines are well
    /// separated, then held fixed so curve identities never swap.
    pub label: u8,
    /// Offset at every sweep field, GHz.
    pub offsets_ghz: Vec<f64>,
    /// Relative intensity at every sweep field.
    pub intensities: Vec<f64>,
}

impl TrackedCurve {
    /// Curve name such as `C0`. Stable across the sweep.
    pub fn name(&self) -> String {
        format!("{}{}", self.key.family, self.label)
    }
}

/// Model transition lines across a magnetic-field sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    /// Field magnitudes, Tesla, strictly increasing.
    pub fields_tesla: Vec<f64>,
    /// Per-field merged line tables (indices re-sorted per field).
    pub entries: Vec<Vec<TransitionLine>>,
    /// Tracked curves (per family and sublevel pair), continuous in B.
    pub curves: Vec<TrackedCurve>,
    pub meta: SweepMeta,
}

impl SweepTable {
    pub fn curves_for(&self, family: Family) -> Vec<&TrackedCurve> {
        let mut c: Vec<&TrackedCurve> = self
            .curves
            .iter()
            .filter(|c| c.key.family == family)
            .collect();
        c.sort_by_key(|c| c.label);
        c
    }
}

/// Compute the transition table at every field magnitude along `direction`,
/// tracking lines by sublevel identity so the resulting curves are
/// continuous across the sweep.
pub fn zeeman_sweep(
    params_ground: &ManifoldParameters,
    params_excited: &ManifoldParameters,
    constants: &PhysicalConstants,
    direction: &LabVector,
    magnitudes_tesla: &[f64],
    orientation: DefectOrientation,
) -> Result<SweepTable, TransitionError> {
    if magnitudes_tesla.is_empty() || magnitudes_tesla.windows(2).any(|w| w[1] <= w[0]) {
        return Err(TransitionError::BadFieldList);
    }
    let unit = direction
        .normalized()
        .ok_or(TransitionError::ZeroDirection)?;

    let mut entries = Vec::with_capacity(magnitudes_tesla.len());
    let mut keyed_per_field = Vec::with_capacity(magnitudes_tesla.len());
    for &magnitude in magnitudes_tesla {
        let lab = unit.scaled(magnitude);
        let field = field_in_defect_frame(&lab, orientation);
        let hg = build_hamiltonian(params_ground, constants, &field)?;
        let hu = build_hamiltonian(params_excited, constants, &field)?;
        let ground = eigensystem(&hg, params_ground)?;
        let excited = eigensystem(&hu, params_excited)?;
        keyed_per_field.push(keyed_lines(&ground, &excited));
        entries.push(transition_table(&ground, &excited));
    }

    // Assign stable labels from the top-field ordering.
    let top = keyed_per_field.last().expect("nonempty sweep");
    let mut curves = Vec::with_capacity(16);
    for family in Family::ALL {
        let mut at_top: Vec<&KeyedLine> = top.iter().filter(|l| l.key.family == family).collect();
        at_top.sort_by(|a, b| b.offset_ghz.total_cmp(&a.offset_ghz));
        for (label, top_line) in at_top.iter().enumerate() {
            let key = top_line.key;
            let mut offsets = Vec::with_capacity(keyed_per_field.len());
            let mut intensities = Vec::with_capacity(keyed_per_field.len());
            for field_lines in &keyed_per_field {
                let line = field_lines
                    .iter()
                    .find(|l| l.key == key)
                    .expect("every key present at every field");
                offsets.push(line.offset_ghz);
                intensities.push(line.intensity);
            }
            curves.push(TrackedCurve {
                key,
                label: label as u8,
                offsets_ghz: offsets,
                intensities,
            });
        }
    }

    Ok(SweepTable {
        fields_tesla: magnitudes_tesla.to_vec(),
        entries,
        curves,
        meta: SweepMeta {
            orientation,
            direction: unit,
            ground: *params_ground,
            excited: *params_excited,
            constants: *constants,
        },
    })
}

/// One measured (or synthesized) line position at one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredLine {
    pub family: Family,
    /// Line index within the family, 0..3 in order of decreasing offset.
    pub index: u8,
    pub offset_ghz: f64,
    pub sigma_ghz: Option<f64>,
}

/// Measured line positions across a field sweep, as loaded from disk or
/// produced by the synthetic generator. Carries positions only; model
/// sweeps with intensities and tracking live in [`SweepTable`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasuredSweep {
    /// Field magnitudes, Tesla, strictly increasing.
    pub fields_tesla: Vec<f64>,
    /// Lines per field, aligned with `fields_tesla`.
    pub entries: Vec<Vec<MeasuredLine>>,
}

impl MeasuredSweep {
    pub fn validate(&self) -> Result<(), TransitionError> {
        if self.fields_tesla.is_empty()
            || self.fields_tesla.len() != self.entries.len()
            || self.fields_tesla.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(TransitionError::BadFieldList);
        }
        Ok(())
    }

    /// Offsets of one family at one field, sorted descending.
    pub fn family_offsets(&self, field_index: usize, family: Family) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries[field_index]
            .iter()
            .filter(|l| l.family == family)
            .map(|l| l.offset_ghz)
            .collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Families present anywhere in the table, in A..D order.
    pub fn families(&self) -> Vec<Family> {
        Family::ALL
            .into_iter()
            .filter(|&f| {
                self.entries
                    .iter()
                    .any(|lines| lines.iter().any(|l| l.family == f))
            })
            .collect()
    }

    /// (field, family) cells that do not carry exactly four lines.
    pub fn incomplete_cells(&self) -> Vec<(f64, Family)> {
        let families = self.families();
        let mut out = Vec::new();
        for (i, &field) in self.fields_tesla.iter().enumerate() {
            for &family in &families {
                let n = self.entries[i]
                    .iter()
                    .filter(|l| l.family == family)
                    .count();
                if n != 4 {
                    out.push((field, family));
                }
            }
        }
        out
    }
}
