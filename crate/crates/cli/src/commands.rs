use std::fmt;
use std::fs;
use std::path::Path;

use qtemplate_core::circuit::{grover_oracle, grover_step, iteration_count};
use qtemplate_core::discrimination::build_report;
use qtemplate_core::glyphs::{quadrant, render_glyph};
use qtemplate_core::image::{invert_pixels, noisy_file_name, parse_pbm, render_amplitude_map, write_pbm, write_pgm};
use qtemplate_core::optics::{qft_phase_schedule, resource_counts, verify_optical_qft, MAX_DENSE_QUBITS};
use qtemplate_core::pipeline::{
    prepare_filtered_state, run_match, run_second_hypothesis, sweep_noise, Pair, RECOGNITION_DIRECTION,
};
use qtemplate_core::{BinaryImage, Error, Label, MatchOptions, Mode, PnmEncoding, SweepTable};

use crate::output::{discrimination_csv, match_csv, sweep_csv};
use crate::{DiscriminateArgs, FixturesArgs, MatchArgs, OpticsArgs, RenderArgs, Stage, SweepArgs};

/// Largest deviation the optics check tolerates.
const OPTICS_TOLERANCE: f64 = 1e-12;

#[derive(Debug)]
pub enum Failure {
    /// Unreadable or malformed input; exit status 2.
    Input(String),
    /// A post-selection branch has zero probability; exit status 3.
    PostSelection(String),
    /// Anything else; exit status 4.
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::PostSelection(_) => 3,
            Self::Other(_) => 4,
        }
    }

    fn core(context: &str, error: Error) -> Self {
        let message = format!("{context}: {error}");
        match error {
            Error::Parse { .. } | Error::NotPowerOfTwo(_) => Self::Input(message),
            Error::PostSelectionImpossible { .. } => Self::PostSelection(message),
            _ => Self::Other(message),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(m) | Self::PostSelection(m) | Self::Other(m) => f.write_str(m),
        }
    }
}

fn load(path: &Path) -> Result<BinaryImage, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse_pbm(&bytes).map_err(|e| Failure::core(&path.display().to_string(), e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn apply_noise(image: BinaryImage, noise: Option<f64>, seed: u64) -> Result<BinaryImage, Failure> {
    match noise {
        None => Ok(image),
        Some(p) => invert_pixels(&image, p, seed).map_err(|e| Failure::core("--noise", e)),
    }
}

pub fn cmd_match(args: &MatchArgs) -> Result<(), Failure> {
    let image = apply_noise(load(&args.image)?, args.noise, args.seed)?;
    let template = load(&args.template)?;
    let template2 = args.template2.as_deref().map(load).transpose()?;
    let options = MatchOptions {
        filter: args.filter.spec(),
        mode: if args.sample {
            Mode::Sampled { seed: args.seed }
        } else {
            Mode::Exact
        },
    };
    let outcome = run_match(&image, &template, &options).map_err(|e| Failure::core("match", e))?;
    let second = match &template2 {
        Some(t2) if outcome.post_reject_state.is_some() => {
            Some(run_second_hypothesis(&outcome, &template, t2).map_err(|e| Failure::core("second hypothesis", e))?)
        }
        _ => None,
    };
    let csv = match_csv(&outcome, template2.is_some(), second.as_ref()).map_err(Failure::Other)?;
    print!("{csv}");
    eprintln!("p_accept={:.12}", outcome.p_accept);
    Ok(())
}

fn run_sweeps(args: &SweepArgs) -> Result<SweepTable, Failure> {
    let template_a = load(&args.template)?;
    let template_b = load(&args.template2)?;
    let image_a = args.image.as_deref().map(load).transpose()?.unwrap_or_else(|| template_a.clone());
    let image_b = args.image2.as_deref().map(load).transpose()?.unwrap_or_else(|| template_b.clone());
    if args.trials == 0 {
        return Err(Failure::Input("--trials must be at least 1".into()));
    }
    let images = Pair::new(&image_a, &image_b);
    let templates = Pair::new(&template_a, &template_b);
    let sweep = |options: &MatchOptions| {
        sweep_noise(images, templates, &args.noise, args.trials, args.seed, options)
            .map_err(|e| Failure::core("sweep", e))
    };
    let mut table = sweep(&MatchOptions::unfiltered())?;
    if let Some(spec) = args.filter.spec() {
        let filtered = sweep(&MatchOptions::filtered(spec))?;
        let mut merged = filtered;
        merged.extend(table);
        table = merged;
    }
    Ok(table)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let table = run_sweeps(args)?;
    create_dir(&args.out)?;
    let path = args.out.join("sweep.csv");
    write(&path, sweep_csv(&table).map_err(Failure::Other)?.as_bytes())?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_discriminate(args: &DiscriminateArgs) -> Result<(), Failure> {
    let table = run_sweeps(&args.sweep)?;
    let reports =
        build_report(&table, args.prior_a, 1.0 - args.prior_a).map_err(|e| Failure::core("discriminate", e))?;
    create_dir(&args.sweep.out)?;
    let sweep_path = args.sweep.out.join("sweep.csv");
    write(&sweep_path, sweep_csv(&table).map_err(Failure::Other)?.as_bytes())?;
    let path = args.sweep.out.join("discrimination.csv");
    write(&path, discrimination_csv(&reports).map_err(Failure::Other)?.as_bytes())?;
    eprintln!("wrote {} and {}", sweep_path.display(), path.display());
    Ok(())
}

pub fn cmd_optics(args: &OpticsArgs) -> Result<(), Failure> {
    if args.max_n == 0 || args.max_n > MAX_DENSE_QUBITS {
        return Err(Failure::Input(format!("--max-n must be in 1..={MAX_DENSE_QUBITS}")));
    }
    let mut worst: f64 = 0.0;
    for n in 1..=args.max_n {
        let check = verify_optical_qft(n).map_err(|e| Failure::core("optics", e))?;
        worst = worst
            .max(check.qft_deviation)
            .max(check.hadamard_deviation)
            .max(check.unitarity_deviation);
        println!(
            "n={n}: qft_deviation={:.3e} hadamard_deviation={:.3e} unitarity_deviation={:.3e}",
            check.qft_deviation, check.hadamard_deviation, check.unitarity_deviation
        );
    }
    for n in 1..=args.max_n {
        let counts = resource_counts(n, n).map_err(|e| Failure::core("optics", e))?;
        println!("n={n}: prep={} qft={}", counts.preparation_splitters, counts.qft_splitters);
    }
    if let Some(n) = args.schedule {
        let schedule = qft_phase_schedule(n).map_err(|e| Failure::core("--schedule", e))?;
        print!("{}", schedule.to_table());
        let phases: Vec<String> = schedule
            .shifter_phases()
            .iter()
            .map(|p| format!("{}", p / std::f64::consts::PI))
            .collect();
        println!("shifter_phases_over_pi={}", phases.join(" "));
    }
    if worst > OPTICS_TOLERANCE {
        return Err(Failure::Other(format!(
            "optical network deviates by {worst:e} from the target matrices"
        )));
    }
    Ok(())
}

pub fn cmd_render(args: &RenderArgs) -> Result<(), Failure> {
    let image = apply_noise(load(&args.image)?, args.noise, args.seed)?;
    let filter = match args.stage {
        Stage::Input => None,
        Stage::Filtered | Stage::Rotated => args.filter.spec(),
    };
    let (_, _, mut state) =
        prepare_filtered_state(&image, filter.as_ref()).map_err(|e| Failure::core("render", e))?;
    if let Stage::Rotated = args.stage {
        let Some(path) = &args.template else {
            return Err(Failure::Input("--stage rotated needs --template".into()));
        };
        let template = load(path)?;
        if template.pixel_count() != image.pixel_count() {
            return Err(Failure::Input("image and template sizes differ".into()));
        }
        let oracle = grover_oracle(&template).map_err(|e| Failure::core("template", e))?;
        let steps = iteration_count(template.pixel_count(), template.point_count())
            .map_err(|e| Failure::core("template", e))?;
        for _ in 0..steps {
            grover_step(&mut state, &oracle, RECOGNITION_DIRECTION).map_err(|e| Failure::core("render", e))?;
        }
    }
    let map = render_amplitude_map(&state, image.n_x(), image.n_y()).map_err(|e| Failure::core("render", e))?;
    let encoding = if args.raw { PnmEncoding::Raw } else { PnmEncoding::Plain };
    write(&args.out, &write_pgm(&map, args.highlight, encoding))
}

pub fn cmd_fixtures(args: &FixturesArgs) -> Result<(), Failure> {
    create_dir(&args.out)?;
    let glyph = |label, size| render_glyph(label, size).map_err(|e| Failure::core("fixtures", e));
    for label in Label::BOTH {
        for size in [32, 64, 512] {
            let encoding = if size > 64 { PnmEncoding::Raw } else { PnmEncoding::Plain };
            let name = format!("{}_{size}.pbm", label.as_str());
            write(&args.out.join(name), &write_pbm(&glyph(label, size)?, encoding))?;
        }
        for &p in &args.noise {
            let noisy = invert_pixels(&glyph(label, 64)?, p, args.seed).map_err(|e| Failure::core("--noise", e))?;
            let name = noisy_file_name(&format!("{}_64", label.as_str()), p, args.seed);
            write(&args.out.join(name), &write_pbm(&noisy, PnmEncoding::Plain))?;
        }
    }
    let q = quadrant(16).map_err(|e| Failure::core("fixtures", e))?;
    write(&args.out.join("quadrant_16.pbm"), &write_pbm(&q, PnmEncoding::Plain))
}
