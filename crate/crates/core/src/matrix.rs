//! Probability matrices for section start times and durations.
//!
//! Sections `s_1..s_m` carry weights `w_i`; start marks `t_1..t_n` carry
//! weights `q_j`; affinities `p_ij` in `[0, 1]` say how willing section `i`
//! is to start at mark `j`. The cell mass
//!
//! ```text
//! mu_ij = w_i * p_ij * q_j / Z,    Z = sum_kl w_k * p_kl * q_l
//! ```
//!
//! is the probability that section `i` starts at mark `j`. The leading-block
//! sums of `mu` ([`ProbabilityMatrix::cumulative_at`]) form the cumulative
//! matrix that a single uniform draw is compared against.
//!
//! Durations come from a second matrix with the same construction whose
//! columns are spans of one, two, ... marks. After every assignment the start
//! matrix is adjusted: the section's row is cleared, marks inside the new
//! interval are cleared, nearby marks are attenuated.

use crate::error::{Error, Result};
use crate::generators::pick_weighted;
use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq)]
pub struct SectionSpec {
    id: String,
    weight: f64,
}

impl SectionSpec {
    pub fn new(id: impl Into<String>, weight: f64) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::invalid("section", "empty id"));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::invalid(
                "section",
                format!("`{id}` weight {weight} must be positive"),
            ));
        }
        Ok(Self { id, weight })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// `n + 1` strictly ascending time marks; the last one ends the piece and is
/// never a start. Each of the first `n` marks has a weight.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    marks: Vec<f64>,
    weights: Vec<f64>,
}

impl TimeGrid {
    pub fn new(marks: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if marks.len() < 2 {
            return Err(Error::invalid("time grid", "needs at least two marks"));
        }
        if weights.len() != marks.len() - 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} marks need {} mark weights, got {}",
                marks.len(),
                marks.len() - 1,
                weights.len()
            )));
        }
        if marks.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::invalid("time grid", "marks must be finite and non-negative"));
        }
        if marks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("time grid", "marks must strictly increase"));
        }
        if weights.iter().any(|q| !q.is_finite() || *q < 0.0) {
            return Err(Error::invalid("time grid", "mark weights must be non-negative"));
        }
        if !(weights.iter().sum::<f64>() > 0.0) {
            return Err(Error::invalid("time grid", "mark weights are all zero"));
        }
        Ok(Self { marks, weights })
    }

    /// Evenly spaced marks with equal weights.
    pub fn uniform(end: f64, starts: usize) -> Result<Self> {
        let marks = (0..=starts)
            .map(|j| end * j as f64 / starts.max(1) as f64)
            .collect();
        Self::new(marks, vec![1.0; starts])
    }

    /// Number of possible start marks, `n`.
    pub fn starts(&self) -> usize {
        self.weights.len()
    }

    /// All `n + 1` marks.
    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mark(&self, j: usize) -> f64 {
        self.marks[j]
    }

    pub fn start(&self) -> f64 {
        self.marks[0]
    }

    pub fn end(&self) -> f64 {
        self.marks[self.marks.len() - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    rows: Vec<Vec<f64>>,
}

impl AffinityMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(first) = rows.first() {
            if rows.iter().any(|r| r.len() != first.len()) {
                return Err(Error::DimensionMismatch("ragged affinity rows".into()));
            }
        }
        if rows
            .iter()
            .flatten()
            .any(|p| !(p.is_finite() && (0.0..=1.0).contains(p)))
        {
            return Err(Error::invalid("affinities", "entries must lie in [0, 1]"));
        }
        Ok(Self { rows })
    }

    /// Every section equally willing to start anywhere.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![vec![1.0; cols]; rows],
        }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }
}

/// Normalized `w_i p_ij q_j` masses, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrix {
    rows: usize,
    cols: usize,
    masses: Vec<f64>,
}

impl MassMatrix {
    pub fn build(
        row_weights: &[f64],
        col_weights: &[f64],
        affinities: &AffinityMatrix,
    ) -> Result<Self> {
        let (rows, cols) = (row_weights.len(), col_weights.len());
        if affinities.rows.len() != rows || affinities.rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "affinities must be {rows}x{cols}"
            )));
        }
        let mut masses = Vec::with_capacity(rows * cols);
        for (w, prow) in row_weights.iter().zip(&affinities.rows) {
            for (p, q) in prow.iter().zip(col_weights) {
                masses.push(w * p * q);
            }
        }
        let z: f64 = masses.iter().sum();
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::DegenerateMatrix);
        }
        masses.iter_mut().for_each(|x| *x /= z);
        Ok(Self { rows, cols, masses })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.masses[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.masses[i * self.cols..(i + 1) * self.cols]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Sum of the masses in the leading `i` rows and `j` columns
    /// (`1 <= i <= m`, `1 <= j <= n`).
    pub fn cumulative_at(&self, i: usize, j: usize) -> Result<f64> {
        if i == 0 || i > self.rows {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.rows,
            });
        }
        if j == 0 || j > self.cols {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.cols,
            });
        }
        Ok((0..i).map(|k| self.row(k)[..j].iter().sum::<f64>()).sum())
    }

    /// The full cumulative matrix, `table[i][j] = cumulative_at(i + 1, j + 1)`.
    pub fn cumulative_table(&self) -> Vec<Vec<f64>> {
        let mut table = vec![vec![0.0; self.cols]; self.rows];
        for i in 0..self.rows {
            let mut row_prefix = 0.0;
            for j in 0..self.cols {
                row_prefix += self.mass(i, j);
                let above = if i > 0 { table[i - 1][j] } else { 0.0 };
                table[i][j] = above + row_prefix;
            }
        }
        table
    }

    /// Draws a cell with probability equal to its mass from one unit draw,
    /// scanning cells in row-major order.
    pub fn sample_cell(&self, rng: &mut RandomSource) -> Result<(usize, usize)> {
        self.cell_at(rng.next_unit())
    }

    pub fn cell_at(&self, u: f64) -> Result<(usize, usize)> {
        let flat = pick_weighted(&self.masses, u).ok_or(Error::DegenerateMatrix)?;
        Ok((flat / self.cols, flat % self.cols))
    }

    fn zero_row(&mut self, i: usize) {
        let cols = self.cols;
        self.masses[i * cols..(i + 1) * cols].fill(0.0);
    }

    fn scale_col(&mut self, j: usize, factor: f64) {
        for i in 0..self.rows {
            self.masses[i * self.cols + j] *= factor;
        }
    }

    /// Rescales to unit total; an all-zero matrix stays as it is.
    fn renormalize(&mut self) {
        let total = self.total();
        if total > 0.0 {
            self.masses.iter_mut().for_each(|x| *x /= total);
        }
    }
}

/// Start-time matrix over sections and start marks.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    sections: Vec<SectionSpec>,
    grid: TimeGrid,
    cells: MassMatrix,
}

impl ProbabilityMatrix {
    pub fn build(
        sections: Vec<SectionSpec>,
        grid: TimeGrid,
        affinities: &AffinityMatrix,
    ) -> Result<Self> {
        check_unique_ids(&sections)?;
        let weights: Vec<f64> = sections.iter().map(|s| s.weight).collect();
        let cells = MassMatrix::build(&weights, &grid.weights, affinities)?;
        Ok(Self {
            sections,
            grid,
            cells,
        })
    }

    pub fn sections(&self) -> &[SectionSpec] {
        &self.sections
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn cells(&self) -> &MassMatrix {
        &self.cells
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.cells.mass(i, j)
    }

    /// See [`MassMatrix::cumulative_at`].
    pub fn cumulative_at(&self, i: usize, j: usize) -> Result<f64> {
        self.cells.cumulative_at(i, j)
    }

    pub fn sample_cell(&self, rng: &mut RandomSource) -> Result<(usize, usize)> {
        self.cells.sample_cell(rng)
    }

    pub fn section_index(&self, id: &str) -> Result<usize> {
        self.sections
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::SectionUnknown(id.to_owned()))
    }

    /// Adjusts the masses after `assignment`:
    /// its section's row is cleared, every mark inside
    /// `[start, start + duration)` is cleared, marks up to `policy.window`
    /// positions outside the interval are scaled by `policy.attenuation`,
    /// and the result is renormalized unless nothing is left.
    pub fn apply_adjustment(&mut self, assignment: &Assignment, policy: &AdjustmentPolicy) {
        let n = self.grid.starts();
        self.cells.zero_row(assignment.section_index);
        let first = assignment.mark;
        let end = assignment.end();
        let after = (first..n)
            .find(|&j| self.grid.mark(j) >= end)
            .unwrap_or(n);
        for j in first..after {
            self.cells.scale_col(j, 0.0);
        }
        for j in first.saturating_sub(policy.window)..first {
            self.cells.scale_col(j, policy.attenuation);
        }
        for j in after..(after + policy.window).min(n) {
            self.cells.scale_col(j, policy.attenuation);
        }
        self.cells.renormalize();
    }
}

fn check_unique_ids(sections: &[SectionSpec]) -> Result<()> {
    for (i, s) in sections.iter().enumerate() {
        if sections[..i].iter().any(|o| o.id == s.id) {
            return Err(Error::invalid("sections", format!("duplicate id `{}`", s.id)));
        }
    }
    Ok(())
}

/// Duration matrix: rows are sections, column `k` is a span of `k + 1`
/// consecutive marks.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationMatrix {
    cells: MassMatrix,
}

impl DurationMatrix {
    pub fn build(
        sections: &[SectionSpec],
        span_weights: &[f64],
        affinities: &AffinityMatrix,
    ) -> Result<Self> {
        if span_weights.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::invalid("duration weights", "must be non-negative"));
        }
        let weights: Vec<f64> = sections.iter().map(|s| s.weight).collect();
        Ok(Self {
            cells: MassMatrix::build(&weights, span_weights, affinities)?,
        })
    }

    /// Every span equally likely for every section.
    pub fn uniform(sections: &[SectionSpec], grid: &TimeGrid) -> Result<Self> {
        let n = grid.starts();
        Self::build(
            sections,
            &vec![1.0; n],
            &AffinityMatrix::ones(sections.len(), n),
        )
    }

    pub fn cells(&self) -> &MassMatrix {
        &self.cells
    }

    /// Chooses how long section `section` lasts when starting at mark
    /// `mark`. Candidates end at a later mark no further than the first
    /// occupied mark after `mark` (or the piece end); the section's row of
    /// masses is renormalized over them. Returns the number of marks spanned
    /// and the duration in seconds.
    pub fn choose_duration(
        &self,
        grid: &TimeGrid,
        section: usize,
        mark: usize,
        occupied: &[bool],
        rng: &mut RandomSource,
    ) -> Result<(usize, f64)> {
        let n = grid.starts();
        let limit = (mark + 1..n).find(|&l| occupied[l]).unwrap_or(n);
        let row = self.cells.row(section);
        let weights: Vec<f64> = (1..=n - mark)
            .map(|span| {
                if mark + span <= limit && span <= row.len() {
                    row[span - 1]
                } else {
                    0.0
                }
            })
            .collect();
        let u = rng.next_unit();
        pick_weighted(&weights, u)
            .map(|k| (k + 1, grid.mark(mark + k + 1) - grid.mark(mark)))
            .ok_or_else(|| Error::NoFeasibleDuration {
                section: section.to_string(),
                mark,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustmentPolicy {
    pub window: usize,
    pub attenuation: f64,
}

impl AdjustmentPolicy {
    pub fn new(window: usize, attenuation: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&attenuation) {
            return Err(Error::invalid(
                "adjustment policy",
                format!("attenuation {attenuation} outside [0, 1]"),
            ));
        }
        Ok(Self {
            window,
            attenuation,
        })
    }
}

impl Default for AdjustmentPolicy {
    fn default() -> Self {
        Self {
            window: 1,
            attenuation: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub section: String,
    pub section_index: usize,
    /// Index of the start mark.
    pub mark: usize,
    /// Number of marks spanned.
    pub span: usize,
    pub start: f64,
    pub duration: f64,
    /// The closing mark, exactly as it appears on the grid.
    pub end: f64,
}

impl Assignment {
    pub fn end(&self) -> f64 {
        self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleOrder {
    /// Sections are assigned in this order; each draws its start mark from
    /// its own row.
    Listed(Vec<String>),
    /// The matrix picks the next section and its start mark together.
    Drawn,
}

/// Everything needed to schedule sections on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    starts: ProbabilityMatrix,
    durations: DurationMatrix,
    policy: AdjustmentPolicy,
}

impl Manifold {
    pub fn new(
        starts: ProbabilityMatrix,
        durations: DurationMatrix,
        policy: AdjustmentPolicy,
    ) -> Result<Self> {
        let (m, n) = (starts.sections.len(), starts.grid.starts());
        if durations.cells.rows() != m || durations.cells.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "duration matrix must be {m}x{n}"
            )));
        }
        Ok(Self {
            starts,
            durations,
            policy,
        })
    }

    pub fn starts(&self) -> &ProbabilityMatrix {
        &self.starts
    }

    pub fn durations(&self) -> &DurationMatrix {
        &self.durations
    }

    pub fn policy(&self) -> AdjustmentPolicy {
        self.policy
    }

    /// Assigns a start mark and a duration to every section. Assigned
    /// intervals never overlap.
    pub fn schedule(&self, order: &ScheduleOrder, rng: &mut RandomSource) -> Result<Vec<Assignment>> {
        let sections = &self.starts.sections;
        let mut matrix = self.starts.clone();
        let mut occupied = vec![false; matrix.grid.starts()];
        let mut out = Vec::with_capacity(sections.len());

        let listed = match order {
            ScheduleOrder::Listed(ids) => {
                let indices = ids
                    .iter()
                    .map(|id| matrix.section_index(id))
                    .collect::<Result<Vec<_>>>()?;
                let mut seen = vec![false; sections.len()];
                for &i in &indices {
                    if std::mem::replace(&mut seen[i], true) {
                        return Err(Error::invalid(
                            "schedule order",
                            format!("`{}` listed twice", sections[i].id),
                        ));
                    }
                }
                if let Some(i) = seen.iter().position(|s| !s) {
                    return Err(Error::invalid(
                        "schedule order",
                        format!("`{}` missing", sections[i].id),
                    ));
                }
                Some(indices)
            }
            ScheduleOrder::Drawn => None,
        };

        for turn in 0..sections.len() {
            let (i, mark) = match &listed {
                Some(indices) => {
                    let i = indices[turn];
                    let j = pick_weighted(matrix.cells.row(i), rng.next_unit())
                        .ok_or_else(|| Error::SchedulingInfeasible(sections[i].id.clone()))?;
                    (i, j)
                }
                None => matrix.sample_cell(rng).map_err(|_| {
                    let pending = sections
                        .iter()
                        .find(|s| out.iter().all(|a: &Assignment| a.section != s.id))
                        .expect("a section is still pending");
                    Error::SchedulingInfeasible(pending.id.clone())
                })?,
            };
            let (span, duration) = self
                .durations
                .choose_duration(&matrix.grid, i, mark, &occupied, rng)
                .map_err(|_| Error::NoFeasibleDuration {
                    section: sections[i].id.clone(),
                    mark,
                })?;
            let start = matrix.grid.mark(mark);
            let assignment = Assignment {
                section: sections[i].id.clone(),
                section_index: i,
                mark,
                span,
                start,
                duration,
                end: matrix.grid.mark(mark + span),
            };
            occupied[mark..mark + span].fill(true);
            matrix.apply_adjustment(&assignment, &self.policy);
            out.push(assignment);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sections(weights: &[f64]) -> Vec<SectionSpec> {
        weights
            .iter()
            .enumerate()
            .map(|(i, w)| SectionSpec::new(format!("s{}", i + 1), *w).unwrap())
            .collect()
    }

    fn weighted() -> ProbabilityMatrix {
        ProbabilityMatrix::build(
            sections(&[2.0, 1.0]),
            TimeGrid::new(vec![0.0, 10.0, 20.0], vec![1.0, 3.0]).unwrap(),
            &AffinityMatrix::ones(2, 2),
        )
        .unwrap()
    }

    fn symmetric() -> ProbabilityMatrix {
        ProbabilityMatrix::build(
            sections(&[1.0, 1.0]),
            TimeGrid::new(vec![0.0, 10.0, 20.0], vec![1.0, 1.0]).unwrap(),
            &AffinityMatrix::ones(2, 2),
        )
        .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn symmetric_masses() {
        let p = symmetric();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(p.mass(i, j), 0.25));
            }
        }
        assert!(close(p.cumulative_at(1, 2).unwrap(), 0.5));
        assert!(close(p.cumulative_at(2, 2).unwrap(), 1.0));
    }

    #[test]
    fn weighted_masses() {
        // w = [2, 1], q = [1, 3]: w_i q_j = [[2, 6], [1, 3]], Z = 12
        let p = weighted();
        let expected = [[2.0, 6.0], [1.0, 3.0]];
        for (i, row) in expected.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert!(close(p.mass(i, j), x / 12.0));
            }
        }
        assert!(close(p.cumulative_at(1, 2).unwrap(), 8.0 / 12.0));
        assert!(close(p.cumulative_at(2, 1).unwrap(), 3.0 / 12.0));
        let table = p.cells().cumulative_table();
        assert!(close(table[0][1], 8.0 / 12.0));
        assert!(close(table[1][1], 1.0));
    }

    #[test]
    fn zero_affinity_row() {
        let p = ProbabilityMatrix::build(
            sections(&[1.0, 1.0]),
            TimeGrid::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.0]).unwrap(),
            &AffinityMatrix::new(vec![vec![0.0, 0.0], vec![1.0, 0.5]]).unwrap(),
        )
        .unwrap();
        assert_eq!(p.cells().row(0), &[0.0, 0.0]);
    }

    #[test]
    fn degenerate_and_bad_inputs() {
        let grid = TimeGrid::new(vec![0.0, 1.0], vec![1.0]).unwrap();
        assert_eq!(
            ProbabilityMatrix::build(sections(&[1.0]), grid.clone(), &AffinityMatrix::new(vec![vec![0.0]]).unwrap()),
            Err(Error::DegenerateMatrix)
        );
        assert!(matches!(
            ProbabilityMatrix::build(sections(&[1.0]), grid.clone(), &AffinityMatrix::ones(2, 1)),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(TimeGrid::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0], vec![]).is_err());
        assert!(SectionSpec::new("a", 0.0).is_err());
        assert!(AffinityMatrix::new(vec![vec![1.5]]).is_err());
        let dup = vec![
            SectionSpec::new("a", 1.0).unwrap(),
            SectionSpec::new("a", 1.0).unwrap(),
        ];
        assert!(ProbabilityMatrix::build(dup, grid, &AffinityMatrix::ones(2, 1)).is_err());
    }

    #[test]
    fn cumulative_index_bounds() {
        let p = symmetric();
        assert!(p.cumulative_at(0, 1).is_err());
        assert!(p.cumulative_at(1, 3).is_err());
        assert!(p.cumulative_at(3, 1).is_err());
    }

    #[test]
    fn sample_edges() {
        let p = symmetric();
        assert_eq!(p.cells().cell_at(0.0), Ok((0, 0)));
        assert_eq!(p.cells().cell_at(0.26), Ok((0, 1)));
        assert_eq!(p.cells().cell_at(0.99), Ok((1, 1)));
        let single = ProbabilityMatrix::build(
            sections(&[1.0, 1.0]),
            TimeGrid::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0]).unwrap(),
            &AffinityMatrix::new(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap(),
        )
        .unwrap();
        let mut rng = RandomSource::new(8);
        assert!((0..200).all(|_| single.sample_cell(&mut rng) == Ok((1, 1))));
    }

    fn assignment(p: &ProbabilityMatrix, i: usize, mark: usize, span: usize) -> Assignment {
        let start = p.grid().mark(mark);
        Assignment {
            section: p.sections()[i].id().to_owned(),
            section_index: i,
            mark,
            span,
            start,
            duration: p.grid().mark(mark + span) - start,
            end: p.grid().mark(mark + span),
        }
    }

    #[test]
    fn adjustment_on_symmetric_case() {
        let mut p = symmetric();
        let a = assignment(&p, 0, 0, 1);
        p.apply_adjustment(&a, &AdjustmentPolicy::new(1, 1.0).unwrap());
        assert_eq!(p.cells().masses(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn adjustment_window_and_attenuation() {
        let mut p = ProbabilityMatrix::build(
            sections(&[1.0, 1.0]),
            TimeGrid::uniform(50.0, 5).unwrap(),
            &AffinityMatrix::ones(2, 5),
        )
        .unwrap();
        // section 0 on marks 2..3
        let a = assignment(&p, 0, 2, 1);
        p.apply_adjustment(&a, &AdjustmentPolicy::new(0, 0.0).unwrap());
        assert_eq!(p.cells().row(0), &[0.0; 5]);
        let row = p.cells().row(1);
        assert_eq!(row[2], 0.0);
        assert!(row.iter().enumerate().all(|(j, x)| j == 2 || close(*x, 0.25)));

        let mut p = ProbabilityMatrix::build(
            sections(&[1.0, 1.0]),
            TimeGrid::uniform(50.0, 5).unwrap(),
            &AffinityMatrix::ones(2, 5),
        )
        .unwrap();
        p.apply_adjustment(&a, &AdjustmentPolicy::default());
        // row 1 raw: [1, .5, 0, .5, 1] / 3
        let row = p.cells().row(1);
        let expected = [1.0, 0.5, 0.0, 0.5, 1.0].map(|x| x / 3.0);
        for (x, e) in row.iter().zip(expected) {
            assert!(close(*x, e), "{row:?}");
        }
    }

    #[test]
    fn adjustment_to_all_zero_is_terminal() {
        let mut p = ProbabilityMatrix::build(
            sections(&[1.0]),
            TimeGrid::new(vec![0.0, 1.0], vec![1.0]).unwrap(),
            &AffinityMatrix::ones(1, 1),
        )
        .unwrap();
        let a = assignment(&p, 0, 0, 1);
        p.apply_adjustment(&a, &AdjustmentPolicy::default());
        assert_eq!(p.cells().total(), 0.0);
        assert_eq!(p.sample_cell(&mut RandomSource::new(1)), Err(Error::DegenerateMatrix));
    }

    #[test]
    fn span_choice_masks_occupied_marks() {
        let secs = sections(&[1.0]);
        let grid = TimeGrid::new(vec![0.0, 10.0, 20.0, 30.0], vec![1.0; 3]).unwrap();
        let q = DurationMatrix::uniform(&secs, &grid).unwrap();
        let mut rng = RandomSource::new(2);
        // mark 2 occupied: only a one-mark span fits from mark 1
        let occupied = [false, false, true];
        assert!((0..100).all(|_| q.choose_duration(&grid, 0, 1, &occupied, &mut rng) == Ok((1, 10.0))));

        let q = DurationMatrix::build(&secs, &[0.0, 1.0, 1.0], &AffinityMatrix::ones(1, 3)).unwrap();
        assert!(matches!(
            q.choose_duration(&grid, 0, 1, &occupied, &mut rng),
            Err(Error::NoFeasibleDuration { .. })
        ));
    }

    #[test]
    fn schedule_single_section_single_mark() {
        let secs = sections(&[1.0]);
        let grid = TimeGrid::new(vec![0.0, 60.0], vec![1.0]).unwrap();
        let q = DurationMatrix::uniform(&secs, &grid).unwrap();
        let p = ProbabilityMatrix::build(secs, grid, &AffinityMatrix::ones(1, 1)).unwrap();
        let m = Manifold::new(p, q, AdjustmentPolicy::default()).unwrap();
        let out = m
            .schedule(&ScheduleOrder::Listed(vec!["s1".into()]), &mut RandomSource::new(0))
            .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!((out[0].start, out[0].duration), (0.0, 60.0));
    }

    #[test]
    fn schedule_rejects_bad_orders_and_zero_rows() {
        let secs = sections(&[1.0, 1.0]);
        let grid = TimeGrid::uniform(20.0, 2).unwrap();
        let q = DurationMatrix::uniform(&secs, &grid).unwrap();
        let p = ProbabilityMatrix::build(
            secs,
            grid,
            &AffinityMatrix::new(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap(),
        )
        .unwrap();
        let m = Manifold::new(p, q, AdjustmentPolicy::default()).unwrap();
        let mut rng = RandomSource::new(0);
        let order = |ids: &[&str]| ScheduleOrder::Listed(ids.iter().map(|s| s.to_string()).collect());
        assert_eq!(
            m.schedule(&order(&["s2", "s1"]), &mut rng),
            Err(Error::SchedulingInfeasible("s2".into()))
        );
        assert!(m.schedule(&order(&["s1"]), &mut rng).is_err());
        assert!(m.schedule(&order(&["s1", "s1"]), &mut rng).is_err());
        assert_eq!(
            m.schedule(&order(&["s1", "x"]), &mut rng),
            Err(Error::SectionUnknown("x".into()))
        );
    }

    #[test]
    fn drawn_order_assigns_every_section_once() {
        let secs = sections(&[1.0, 2.0, 3.0]);
        let grid = TimeGrid::uniform(60.0, 6).unwrap();
        let q = DurationMatrix::uniform(&secs, &grid).unwrap();
        let p = ProbabilityMatrix::build(secs, grid, &AffinityMatrix::ones(3, 6)).unwrap();
        let m = Manifold::new(p, q, AdjustmentPolicy::new(0, 1.0).unwrap()).unwrap();
        for seed in 0..50 {
            match m.schedule(&ScheduleOrder::Drawn, &mut RandomSource::new(seed)) {
                Ok(out) => {
                    let mut ids: Vec<_> = out.iter().map(|a| a.section.as_str()).collect();
                    ids.sort();
                    assert_eq!(ids, ["s1", "s2", "s3"]);
                }
                Err(e) => assert!(matches!(e, Error::SchedulingInfeasible(_)), "{e}"),
            }
        }
    }
}
