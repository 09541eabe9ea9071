//! The two-dimensional experiment: t1 loop, mixing, t2 acquisition,
//! spectral processing, peak picking, and extraction of the input/output
//! correlation map that serves as a gate's readout.
//!
//! Each t1 increment restarts from equilibrium, runs the program's
//! preparation pulses, evolves for `k * dwell1`, executes the remaining
//! events (gradient, mixing pulses, delays) and records an FID. The
//! gradient purges every coherence except the single-quantum pathway of
//! the acquired spins, so the frequency label picked up during t1 rides
//! into detection as a phase-modulated (complex) t1 interferogram, and
//! the mixing pulses relabel it to the output line. Peaks therefore sit
//! at (input line, output line); magnitude-mode processing discards the
//! pathway phases.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

use crate::density::{DensityState, Propagator};
use crate::gates::GateSpec;
use crate::program::{ProgramError, PulseEvent, PulseProgram};
use crate::spin::SpinSystem;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("program has no {0} marker")]
    MissingMarker(&'static str),
    #[error("acquisition needs at least 8 points per axis, got {0}")]
    CountsTooSmall(usize),
    #[error("dwell times must be positive")]
    BadDwell,
    #[error("zero-fill factor must be at least 1")]
    BadZeroFill,
    #[error("relative threshold must lie strictly between 0 and 1")]
    BadThreshold,
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("reference line frequencies are not pairwise distinct at this spectral width")]
    DegenerateLines,
    #[error("ambiguous peak assignment: {}", .0.join("; "))]
    AmbiguousPeaks(Vec<String>),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Density(#[from] crate::density::DensityError),
}

/// Acquisition parameters for the 2D pipeline.
#[derive(Debug, Clone, Copy)]
pub struct Acquisition {
    pub n_t1: usize,
    pub n_t2: usize,
    pub dwell1: f64,
    pub dwell2: f64,
    pub zerofill: usize,
    pub rel_threshold: f64,
}

impl Acquisition {
    /// Defaults sized from the analytic line positions of the detected
    /// spins: 128 x 128 points with the spectral width padded an eighth
    /// beyond the highest line plus 8 Hz, zero-fill by 2, 20% peak
    /// threshold.
    pub fn defaults_for(system: &SpinSystem, detected: &[usize]) -> Self {
        let mut fmax: f64 = 0.0;
        for &spin in detected {
            for t in system.single_quantum_transitions(spin) {
                fmax = fmax.max(system.transition_frequency(&t).expect("enumerated"));
            }
        }
        let sw = 1.125 * fmax + 8.0;
        let dwell = 1.0 / sw;
        Self {
            n_t1: 128,
            n_t2: 128,
            dwell1: dwell,
            dwell2: dwell,
            zerofill: 2,
            rel_threshold: 0.2,
        }
    }

    /// Apodization matching the acquisition length: decays the last t2
    /// sample by about exp(-2*pi).
    pub fn default_line_broadening(&self) -> f64 {
        2.0 / (self.n_t2 as f64 * self.dwell2)
    }
}

/// Time-domain grid of one 2D experiment, `n_t1` rows by `n_t2` complex
/// points.
#[derive(Debug, Clone)]
pub struct RawData2D {
    grid: Array2<Complex64>,
    dwell1: f64,
    dwell2: f64,
}

impl RawData2D {
    pub fn grid(&self) -> &Array2<Complex64> {
        &self.grid
    }

    pub fn dwell1(&self) -> f64 {
        self.dwell1
    }

    pub fn dwell2(&self) -> f64 {
        self.dwell2
    }
}

enum Step {
    Pulse(Propagator),
    Evolve(f64),
    T1,
    Crush,
}

fn compile_steps(
    system: &SpinSystem,
    program: &PulseProgram,
) -> Result<(Vec<Step>, Vec<usize>), ExperimentError> {
    program.validate_against(system)?;
    let acquired = program.acquire_spins(system)?;
    let mut steps = Vec::new();
    for event in program.events() {
        match event {
            PulseEvent::HardPulse { spins, angle, phase } => {
                let spins = spins.resolve(system.n_spins())?;
                steps.push(Step::Pulse(Propagator::hard_pulse(
                    system,
                    &spins,
                    *angle,
                    phase.radians(),
                )?));
            }
            PulseEvent::SelectivePulse { spin, angle, phase } => {
                steps.push(Step::Pulse(Propagator::hard_pulse(
                    system,
                    &[*spin],
                    *angle,
                    phase.radians(),
                )?));
            }
            PulseEvent::TransitionPulse { transition, angle, phase } => {
                steps.push(Step::Pulse(Propagator::transition_pulse(
                    system,
                    transition,
                    *angle,
                    phase.radians(),
                )?));
            }
            PulseEvent::Delay { seconds } => steps.push(Step::Evolve(*seconds)),
            PulseEvent::Gradient => steps.push(Step::Crush),
            PulseEvent::EvolveT1 => steps.push(Step::T1),
            PulseEvent::Acquire { .. } => {}
        }
    }
    Ok((steps, acquired))
}

/// Runs the full 2D experiment for a program containing one `t1` marker
/// and a final `acquire`.
pub fn run_2d(
    system: &SpinSystem,
    program: &PulseProgram,
    n_t1: usize,
    dwell1: f64,
    n_t2: usize,
    dwell2: f64,
) -> Result<RawData2D, ExperimentError> {
    if n_t1 < 8 || n_t2 < 8 {
        return Err(ExperimentError::CountsTooSmall(n_t1.min(n_t2)));
    }
    if dwell1 <= 0.0 || dwell2 <= 0.0 {
        return Err(ExperimentError::BadDwell);
    }
    if !program.has_t1() {
        return Err(ExperimentError::MissingMarker("t1"));
    }
    let (steps, acquired) = compile_steps(system, program)?;

    let equilibrium = DensityState::equilibrium(system);
    let mut grid = Array2::from_elem((n_t1, n_t2), Complex64::new(0.0, 0.0));
    for k in 0..n_t1 {
        let mut state = equilibrium.clone();
        for step in &steps {
            state = match step {
                Step::Pulse(u) => state.apply(u)?,
                Step::Evolve(t) => state.evolve(system, *t),
                Step::T1 => state.evolve(system, k as f64 * dwell1),
                Step::Crush => state.retain_single_quantum(&acquired),
            };
        }
        for j in 0..n_t2 {
            if j > 0 {
                state = state.evolve(system, dwell2);
            }
            grid[[k, j]] = state.detect(&acquired);
        }
    }
    Ok(RawData2D { grid, dwell1, dwell2 })
}

/// Magnitude-mode 2D spectrum with frequency axes in Hz relative to the
/// rotating-frame zero; axis values are `k / (n * dwell)` for bin k.
#[derive(Debug, Clone)]
pub struct Spectrum2D {
    magnitudes: Array2<f64>,
    axis1: Vec<f64>,
    axis2: Vec<f64>,
}

impl Spectrum2D {
    pub fn magnitudes(&self) -> &Array2<f64> {
        &self.magnitudes
    }

    pub fn axis1(&self) -> &[f64] {
        &self.axis1
    }

    pub fn axis2(&self) -> &[f64] {
        &self.axis2
    }

    /// Bin width along F1.
    pub fn df1(&self) -> f64 {
        self.axis1[1] - self.axis1[0]
    }

    /// Bin width along F2.
    pub fn df2(&self) -> f64 {
        self.axis2[1] - self.axis2[0]
    }

    /// Spectral width along F1.
    pub fn sw1(&self) -> f64 {
        self.df1() * self.axis1.len() as f64
    }

    /// Spectral width along F2.
    pub fn sw2(&self) -> f64 {
        self.df2() * self.axis2.len() as f64
    }
}

/// Apodizes with `exp(-pi * lb * t)` along both time axes, zero-fills each
/// axis by `zerofill_factor`, applies the 2D DFT and takes magnitudes.
pub fn process(
    raw: &RawData2D,
    zerofill_factor: usize,
    line_broaden_hz: f64,
) -> Result<Spectrum2D, ExperimentError> {
    if zerofill_factor < 1 {
        return Err(ExperimentError::BadZeroFill);
    }
    let (n1, n2) = raw.grid.dim();
    let big1 = n1 * zerofill_factor;
    let big2 = n2 * zerofill_factor;

    let mut data = Array2::from_elem((big1, big2), Complex64::new(0.0, 0.0));
    for k in 0..n1 {
        let w1 = (-PI * line_broaden_hz * k as f64 * raw.dwell1).exp();
        for j in 0..n2 {
            let w2 = (-PI * line_broaden_hz * j as f64 * raw.dwell2).exp();
            data[[k, j]] = raw.grid[[k, j]] * (w1 * w2);
        }
    }

    let mut planner = FftPlanner::new();
    let fft_rows = planner.plan_fft_forward(big2);
    let mut scratch = vec![Complex64::new(0.0, 0.0); big2.max(big1)];
    for mut row in data.rows_mut() {
        let slice = row.as_slice_mut().expect("row-major layout");
        fft_rows.process(slice);
    }
    let fft_cols = planner.plan_fft_forward(big1);
    for j in 0..big2 {
        for k in 0..big1 {
            scratch[k] = data[[k, j]];
        }
        fft_cols.process(&mut scratch[..big1]);
        for k in 0..big1 {
            data[[k, j]] = scratch[k];
        }
    }

    let magnitudes = data.mapv(|z| z.norm());
    let df1 = 1.0 / (big1 as f64 * raw.dwell1);
    let df2 = 1.0 / (big2 as f64 * raw.dwell2);
    Ok(Spectrum2D {
        magnitudes,
        axis1: (0..big1).map(|k| k as f64 * df1).collect(),
        axis2: (0..big2).map(|k| k as f64 * df2).collect(),
    })
}

/// A picked 2D peak with parabolically refined coordinates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Peak {
    #[serde(rename = "f1_hz")]
    pub f1: f64,
    #[serde(rename = "f2_hz")]
    pub f2: f64,
    pub magnitude: f64,
}

fn parabolic_offset(left: f64, center: f64, right: f64) -> f64 {
    let denom = left - 2.0 * center + right;
    if denom.abs() < 1e-300 {
        0.0
    } else {
        0.5 * (left - right) / denom
    }
}

/// Strict local maxima above `rel_threshold` times the global maximum.
/// Neighbourhoods wrap around the periodic DFT axes; plateaus produce no
/// peaks.
pub fn pick_peaks(spectrum: &Spectrum2D, rel_threshold: f64) -> Result<Vec<Peak>, ExperimentError> {
    if !(0.0..=1.0).contains(&rel_threshold) || rel_threshold == 0.0 || rel_threshold == 1.0 {
        return Err(ExperimentError::BadThreshold);
    }
    let (n1, n2) = spectrum.magnitudes.dim();
    if n1 == 0 || n2 == 0 {
        return Err(ExperimentError::EmptySpectrum);
    }
    let global_max = spectrum
        .magnitudes
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    if global_max <= 0.0 {
        return Ok(Vec::new());
    }
    let cutoff = rel_threshold * global_max;
    let m = &spectrum.magnitudes;
    let mut peaks = Vec::new();
    for i in 0..n1 {
        for j in 0..n2 {
            let center = m[[i, j]];
            if center < cutoff {
                continue;
            }
            let mut is_peak = true;
            'neighbours: for di in [-1isize, 0, 1] {
                for dj in [-1isize, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ni = (i as isize + di).rem_euclid(n1 as isize) as usize;
                    let nj = (j as isize + dj).rem_euclid(n2 as isize) as usize;
                    if m[[ni, nj]] >= center {
                        is_peak = false;
                        break 'neighbours;
                    }
                }
            }
            if !is_peak {
                continue;
            }
            let up = m[[(i + n1 - 1) % n1, j]];
            let down = m[[(i + 1) % n1, j]];
            let left = m[[i, (j + n2 - 1) % n2]];
            let right = m[[i, (j + 1) % n2]];
            let d1 = parabolic_offset(up, center, down);
            let d2 = parabolic_offset(left, center, right);
            peaks.push(Peak {
                f1: (i as f64 + d1) * spectrum.df1(),
                f2: (j as f64 + d2) * spectrum.df2(),
                magnitude: center,
            });
        }
    }
    peaks.sort_by(|a, b| {
        b.magnitude
            .partial_cmp(&a.magnitude)
            .unwrap()
            .then(a.f1.partial_cmp(&b.f1).unwrap())
            .then(a.f2.partial_cmp(&b.f2).unwrap())
    });
    Ok(peaks)
}

/// Input label -> output label pairs read off a gate spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrelationMap {
    pairs: Vec<(String, String)>,
}

impl CorrelationMap {
    /// Pairs sorted by descending input label; duplicates collapse.
    pub fn from_pairs(mut pairs: Vec<(String, String)>) -> Self {
        pairs.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
        pairs.dedup();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn output_for(&self, input: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(i, _)| i == input)
            .map(|(_, o)| o.as_str())
    }

    /// True when the pairs form a bijection over the given label set.
    pub fn is_bijection_over(&self, labels: &[String]) -> bool {
        let inputs: Vec<&String> = self.pairs.iter().map(|(i, _)| i).collect();
        let mut outputs: Vec<&String> = self.pairs.iter().map(|(_, o)| o).collect();
        outputs.sort();
        outputs.dedup();
        inputs.len() == labels.len()
            && outputs.len() == labels.len()
            && labels.iter().all(|l| inputs.contains(&l))
    }
}

fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Assigns each peak's F1 to the nearest reference line (input label) and
/// F2 to the nearest line (output label). An assignment farther than half
/// the minimum line spacing from every line is ambiguous and rejected.
pub fn correlation_map(
    peaks: &[Peak],
    system: &SpinSystem,
    sw1: f64,
    sw2: f64,
) -> Result<CorrelationMap, ExperimentError> {
    let lines = system.reference_lines();
    let folded = |sw: f64| -> Vec<(String, f64)> {
        lines
            .iter()
            .map(|(label, f)| (label.clone(), f.rem_euclid(sw)))
            .collect()
    };
    let lines1 = folded(sw1);
    let lines2 = folded(sw2);

    let min_spacing = |ls: &[(String, f64)], sw: f64| -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..ls.len() {
            for j in (i + 1)..ls.len() {
                min = min.min(circular_distance(ls[i].1, ls[j].1, sw));
            }
        }
        min
    };
    let half1 = min_spacing(&lines1, sw1) / 2.0;
    let half2 = min_spacing(&lines2, sw2) / 2.0;
    if half1 < 1e-9 || half2 < 1e-9 {
        return Err(ExperimentError::DegenerateLines);
    }

    let nearest = |f: f64, ls: &[(String, f64)], sw: f64| -> (String, f64) {
        ls.iter()
            .map(|(label, lf)| (label.clone(), circular_distance(f, *lf, sw)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .expect("nonempty line list")
    };

    let mut pairs = Vec::new();
    let mut offending = Vec::new();
    for peak in peaks {
        let (input, d1) = nearest(peak.f1, &lines1, sw1);
        let (output, d2) = nearest(peak.f2, &lines2, sw2);
        if d1 > half1 || d2 > half2 {
            offending.push(format!(
                "peak at ({:.2}, {:.2}) Hz is {:.2}/{:.2} Hz from the nearest lines",
                peak.f1, peak.f2, d1, d2
            ));
        } else {
            pairs.push((input, output));
        }
    }
    if !offending.is_empty() {
        return Err(ExperimentError::AmbiguousPeaks(offending));
    }
    Ok(CorrelationMap::from_pairs(pairs))
}

/// One disagreeing row of a gate verification.
#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub input: String,
    pub expected: String,
    pub actual: Option<String>,
}

/// Result of checking a correlation map against a gate's declared table.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub gate: String,
    pub pass: bool,
    pub mismatches: Vec<Mismatch>,
}

/// Passes iff the map equals the gate's truth table as a set of pairs.
pub fn verify_gate(map: &CorrelationMap, spec: &GateSpec) -> VerifyReport {
    let mut mismatches = Vec::new();
    for (input, expected) in spec.truth_table().pairs() {
        let actual = map.output_for(&input).map(|s| s.to_string());
        if actual.as_deref() != Some(expected.as_str()) {
            mismatches.push(Mismatch { input, expected, actual });
        }
    }
    let extra_inputs: Vec<&(String, String)> = map
        .pairs()
        .iter()
        .filter(|(i, _)| !spec.truth_table().pairs().iter().any(|(ti, _)| ti == i))
        .collect();
    let pass = mismatches.is_empty()
        && extra_inputs.is_empty()
        && map.pairs().len() == spec.truth_table().pairs().len();
    VerifyReport {
        gate: spec.name().to_string(),
        pass,
        mismatches,
    }
}

/// CSV dump (`f1_hz,f2_hz,magnitude`), row-major.
pub fn spectrum_to_csv(spectrum: &Spectrum2D) -> String {
    let mut out = String::from("f1_hz,f2_hz,magnitude\n");
    for (i, f1) in spectrum.axis1.iter().enumerate() {
        for (j, f2) in spectrum.axis2.iter().enumerate() {
            out.push_str(&format!("{f1},{f2},{}\n", spectrum.magnitudes[[i, j]]));
        }
    }
    out
}

/// Coarse ASCII contour plot, max-pooled to at most `rows` x `cols`.
pub fn ascii_contour(spectrum: &Spectrum2D, rows: usize, cols: usize) -> String {
    const LEVELS: &[u8] = b" .:-=+*#%@";
    let (n1, n2) = spectrum.magnitudes.dim();
    let rows = rows.min(n1).max(1);
    let cols = cols.min(n2).max(1);
    let max = spectrum
        .magnitudes
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut out = String::new();
    for r in 0..rows {
        let i0 = r * n1 / rows;
        let i1 = ((r + 1) * n1 / rows).max(i0 + 1);
        for c in 0..cols {
            let j0 = c * n2 / cols;
            let j1 = ((c + 1) * n2 / cols).max(j0 + 1);
            let mut cell = 0.0f64;
            for i in i0..i1 {
                for j in j0..j1 {
                    cell = cell.max(spectrum.magnitudes[[i, j]]);
                }
            }
            let level = ((cell / max) * (LEVELS.len() - 1) as f64).round() as usize;
            out.push(LEVELS[level.min(LEVELS.len() - 1)] as char);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use crate::spin::Role;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    fn three_spin() -> SpinSystem {
        SpinSystem::new(
            vec![100.0, 420.0, 780.0],
            vec![
                vec![0.0, 16.0, 10.0],
                vec![16.0, 0.0, 6.0],
                vec![10.0, 6.0, 0.0],
            ],
            vec![Role::Observer, Role::Input, Role::Input],
        )
        .unwrap()
    }

    fn synthetic_raw(f1: f64, f2: f64, n: usize, sw: f64) -> RawData2D {
        let dwell = 1.0 / sw;
        let mut grid = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
        for k in 0..n {
            for j in 0..n {
                let phase = TAU * (f1 * k as f64 + f2 * j as f64) * dwell;
                grid[[k, j]] = Complex64::from_polar(1.0, phase);
            }
        }
        RawData2D { grid, dwell1: dwell, dwell2: dwell }
    }

    #[test]
    fn all_zero_grid_gives_all_zero_spectrum_and_no_peaks() {
        let raw = RawData2D {
            grid: Array2::from_elem((16, 16), Complex64::new(0.0, 0.0)),
            dwell1: 0.01,
            dwell2: 0.01,
        };
        let spectrum = process(&raw, 2, 1.0).unwrap();
        assert!(spectrum.magnitudes.iter().all(|m| *m == 0.0));
        assert!(pick_peaks(&spectrum, 0.2).unwrap().is_empty());
    }

    #[test]
    fn synthetic_exponential_peaks_within_one_bin() {
        let (f1, f2) = (37.3, 52.9);
        let raw = synthetic_raw(f1, f2, 64, 128.0);
        let spectrum = process(&raw, 2, 2.0 / (64.0 / 128.0)).unwrap();
        let peaks = pick_peaks(&spectrum, 0.5).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].f1 - f1).abs() <= spectrum.df1());
        assert!((peaks[0].f2 - f2).abs() <= spectrum.df2());
    }

    #[test]
    fn parseval_identity_after_zero_fill() {
        let raw = synthetic_raw(17.0, 43.0, 32, 128.0);
        let zf = 2usize;
        let lb = 4.0;
        let spectrum = process(&raw, zf, lb).unwrap();
        let spectral_power: f64 = spectrum.magnitudes.iter().map(|m| m * m).sum();
        let mut time_power = 0.0;
        for k in 0..32 {
            for j in 0..32 {
                let w = (-PI * lb * (k as f64 + j as f64) * raw.dwell1).exp();
                time_power += (raw.grid[[k, j]] * w).norm_sqr();
            }
        }
        let n_total = (32 * zf * 32 * zf) as f64;
        assert!((spectral_power / (n_total * time_power) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn two_separated_equal_peaks_are_both_reported() {
        let raw_a = synthetic_raw(20.0, 20.0, 64, 128.0);
        let raw_b = synthetic_raw(50.0, 90.0, 64, 128.0);
        let mut grid = raw_a.grid.clone();
        grid += &raw_b.grid;
        let raw = RawData2D { grid, dwell1: raw_a.dwell1, dwell2: raw_a.dwell2 };
        let spectrum = process(&raw, 2, 4.0).unwrap();
        let peaks = pick_peaks(&spectrum, 0.3).unwrap();
        assert_eq!(peaks.len(), 2);
    }

    #[test]
    fn uniform_spectrum_reports_no_peaks() {
        let spectrum = Spectrum2D {
            magnitudes: Array2::from_elem((8, 8), 1.0),
            axis1: (0..8).map(|k| k as f64).collect(),
            axis2: (0..8).map(|k| k as f64).collect(),
        };
        assert!(pick_peaks(&spectrum, 0.5).unwrap().is_empty());
    }

    #[test]
    fn threshold_validation() {
        let spectrum = Spectrum2D {
            magnitudes: Array2::from_elem((4, 4), 1.0),
            axis1: (0..4).map(|k| k as f64).collect(),
            axis2: (0..4).map(|k| k as f64).collect(),
        };
        assert!(matches!(pick_peaks(&spectrum, 0.0), Err(ExperimentError::BadThreshold)));
        assert!(matches!(pick_peaks(&spectrum, 1.0), Err(ExperimentError::BadThreshold)));
    }

    #[test]
    fn run_2d_requires_markers_and_counts() {
        let sys = three_spin();
        let no_t1 = parse_program("pulse I0 90 y\nacquire I0").unwrap();
        assert!(matches!(
            run_2d(&sys, &no_t1, 16, 0.01, 16, 0.01),
            Err(ExperimentError::MissingMarker("t1"))
        ));
        let ok = parse_program("pulse I0 90 y\nt1\ngrad\nacquire I0").unwrap();
        assert!(matches!(
            run_2d(&sys, &ok, 4, 0.01, 16, 0.01),
            Err(ExperimentError::CountsTooSmall(4))
        ));
    }

    #[test]
    fn nop_experiment_peaks_sit_on_the_diagonal() {
        let sys = three_spin();
        let program = parse_program("pulse I0 90 y\nt1\ngrad\nacquire I0").unwrap();
        let acq = Acquisition::defaults_for(&sys, &[0]);
        let raw = run_2d(&sys, &program, acq.n_t1, acq.dwell1, acq.n_t2, acq.dwell2).unwrap();
        let spectrum = process(&raw, acq.zerofill, acq.default_line_broadening()).unwrap();
        let peaks = pick_peaks(&spectrum, acq.rel_threshold).unwrap();
        assert_eq!(peaks.len(), 4);
        for peak in &peaks {
            assert!(
                (peak.f1 - peak.f2).abs() <= spectrum.df1() + spectrum.df2(),
                "off-diagonal peak at ({}, {})",
                peak.f1,
                peak.f2
            );
        }
        let map = correlation_map(&peaks, &sys, spectrum.sw1(), spectrum.sw2()).unwrap();
        let expected: Vec<(String, String)> = ["11", "10", "01", "00"]
            .iter()
            .map(|l| (l.to_string(), l.to_string()))
            .collect();
        assert_eq!(map.pairs(), expected.as_slice());
    }

    #[test]
    fn degenerate_lines_are_rejected() {
        let sys = SpinSystem::new(
            vec![100.0, 420.0, 780.0],
            vec![vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]],
            vec![Role::Observer, Role::Input, Role::Input],
        )
        .unwrap();
        let err = correlation_map(&[], &sys, 128.0, 128.0).unwrap_err();
        assert!(matches!(err, ExperimentError::DegenerateLines));
    }

    #[test]
    fn far_peaks_are_ambiguous() {
        let sys = three_spin();
        let stray = Peak { f1: 50.0, f2: 50.0, magnitude: 1.0 };
        let err = correlation_map(&[stray], &sys, 143.0, 143.0).unwrap_err();
        assert!(matches!(err, ExperimentError::AmbiguousPeaks(_)));
    }

    #[test]
    fn verify_gate_reports_mismatches() {
        let xor1 = crate::gates::find_gate("XOR1", None).unwrap();
        let xnor1 = crate::gates::find_gate("XNOR1", None).unwrap();
        let map = CorrelationMap::from_pairs(
            xor1.truth_table()
                .pairs()
                .into_iter()
                .collect(),
        );
        assert!(verify_gate(&map, &xor1).pass);
        let cross = verify_gate(&map, &xnor1);
        assert!(!cross.pass);
        // XOR1 and XNOR1 disagree on every row.
        assert_eq!(cross.mismatches.len(), 4);

        let identity = CorrelationMap::from_pairs(
            ["11", "10", "01", "00"]
                .iter()
                .map(|l| (l.to_string(), l.to_string()))
                .collect(),
        );
        let nop = crate::gates::find_gate("NOP", None).unwrap();
        assert!(verify_gate(&identity, &nop).pass);
    }

    #[test]
    fn csv_and_contour_have_expected_shape() {
        let raw = synthetic_raw(30.0, 60.0, 16, 128.0);
        let spectrum = process(&raw, 1, 8.0).unwrap();
        let csv = spectrum_to_csv(&spectrum);
        assert!(csv.starts_with("f1_hz,f2_hz,magnitude\n"));
        assert_eq!(csv.lines().count(), 1 + 16 * 16);
        let art = ascii_contour(&spectrum, 8, 8);
        assert_eq!(art.lines().count(), 8);
        assert!(art.contains('@'));
    }
}
