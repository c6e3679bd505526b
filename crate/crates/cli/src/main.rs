mod args;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use fpcs::evaluation::{h_scan_csv, roc_csv, roc_from_scan, threshold_grid, RunMetadata};
use fpcs::imaging::{ingest_database, load_image, SourceFormat};
use fpcs::persistence::{load_database, load_space, save_database, save_space, write_atomic};
use fpcs::{
    edges, h_scan, split_database, train, verify, EigenSpace, Error, LabeledTestSet, NoiseLevel,
    NoiseSpec,
};

use args::{Cli, Command, IngestArgs, RocArgs, ScanArgs, TrainArgs, VerifyArgs};

/// Exit code for any failure; 0–2 are verdicts for `verify`.
const EXIT_ERROR: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{line}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Train(a) => train_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::HScan(a) => scan_cmd(a),
        Command::Roc(a) => roc_cmd(a),
    }
}

fn ingest(a: IngestArgs) -> Result<u8, Error> {
    let db = ingest_database(&a.dir, &a.pattern)?;
    save_database(&db, &a.out)?;
    if db.label_fallback {
        eprintln!("warning: some filenames are not finger_impression; columns are in lexicographic order");
    }
    Ok(0)
}

fn train_cmd(a: TrainArgs) -> Result<u8, Error> {
    let cfg = a.edge_config();
    cfg.validate()?;
    let mut db = load_database(&a.db)?;
    if let Some(split) = a.split {
        db = split_database(&db, split.into())?.0;
    }
    let space = train(&db, &cfg)?;
    if let Some(dir) = &a.dump_edges {
        fs::create_dir_all(dir)?;
        for (m, label) in db.labels().iter().enumerate() {
            let staged = edges::apply_edge_stage(&db.image(m), &cfg)?;
            let stem = Path::new(&label.path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| m.to_string());
            staged.save_pgm(&dir.join(format!("{m:04}_{stem}.pgm")))?;
        }
    }
    save_space(&space, &a.out)?;
    Ok(0)
}

fn verify_cmd(a: VerifyArgs) -> Result<u8, Error> {
    let cfg = a.decision_config();
    cfg.validate()?;
    let noise = a
        .noise
        .map(|p| NoiseSpec::new(p.mean, p.variance, a.seed))
        .transpose()?;
    let space = load_space(&a.space)?;
    let format = SourceFormat::from_path(&a.image).unwrap_or(SourceFormat::Tiff);
    let image = load_image(&a.image, format)?;
    let report = verify(&space, &image, &cfg, noise.as_ref())?;
    let line = serde_json::to_string(&report).map_err(|e| Error::Corrupt(e.to_string()))?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{line}")?;
    Ok(report.verdict.exit_code() as u8)
}

struct ScanInputs {
    space: EigenSpace,
    tests: LabeledTestSet,
    meta: RunMetadata,
}

fn noise_level(a: &ScanArgs) -> Result<NoiseLevel, Error> {
    let mut level = NoiseLevel::standard(a.noise_level.into(), a.seed);
    if let Some(p) = a.noise {
        level.spec = NoiseSpec::new(p.mean, p.variance, a.seed)?;
    }
    Ok(level)
}

fn scan_inputs(a: &ScanArgs) -> Result<ScanInputs, Error> {
    let noise = noise_level(a)?;
    let space = load_space(&a.space)?;
    let db = load_database(&a.db)?;
    let policy = a.split.into();
    let (_, tests) = split_database(&db, policy)?;
    let meta = RunMetadata {
        noise,
        space: a.space.display().to_string(),
        database: a.db.display().to_string(),
        split: policy.name().to_owned(),
    };
    Ok(ScanInputs { space, tests, meta })
}

fn scan_cmd(a: ScanArgs) -> Result<u8, Error> {
    let inputs = scan_inputs(&a)?;
    let rows = h_scan(&inputs.space, &inputs.tests, &inputs.meta.noise)?;
    let csv = h_scan_csv(&rows, &inputs.space, &inputs.meta);
    write_atomic(&a.out, csv.as_bytes())?;
    Ok(0)
}

fn roc_cmd(a: RocArgs) -> Result<u8, Error> {
    let grid = threshold_grid(a.tmin, a.tmax, a.steps)?;
    let inputs = scan_inputs(&a.scan)?;
    if !inputs.tests.has_both_classes() {
        return Err(Error::MissingClass);
    }
    let rows = h_scan(&inputs.space, &inputs.tests, &inputs.meta.noise)?;
    let points = roc_from_scan(&rows, &grid)?;
    let csv = roc_csv(&points, &inputs.space, &inputs.meta);
    write_atomic(&a.scan.out, csv.as_bytes())?;
    Ok(0)
}
