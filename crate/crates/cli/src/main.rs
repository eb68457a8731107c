use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use microret::diststats::Binning;
use microret::fitting::ScalingRange;
use microret::pipeline::{
    analyze_sample, run_pipeline, write_outputs, FitConfig, InputConfig, PipelineConfig, ReportRow,
    OUTPUT_DIR_ENV,
};
use microret::returns::{read_values, standardize, ReturnSeries, TimescaleKind, TimescaleSpec};
use microret::synth::{generate_tick_stream, SyntheticStreamSpec};
use microret::tickdata::{write_ticks, SessionCalendar};
use microret::{Error, Result};

/// Return distributions of limit-order-book tick data at microscopic timescales.
///
/// Exit status: 0 on success, 2 when the run completed with flagged
/// (non-converged or failed) fits, 1 on error.
#[derive(Parser)]
#[command(name = "microret", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a config file.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Session calendar file, replacing the one in the config.
        #[arg(long)]
        calendar: Option<PathBuf>,
        /// Timescales such as `event:1,2,4` or `clock:1`; replaces the config list.
        #[arg(long = "timescale")]
        timescales: Vec<String>,
        /// Output directory, replacing `output_dir` from the config.
        #[arg(long, env = OUTPUT_DIR_ENV)]
        out_dir: Option<PathBuf>,
    },
    /// Write a synthetic tick file from a stream spec.
    Synth {
        /// TOML with one stream at top level or several `[[streams]]`.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit one file of returns (one value per line) and print JSON.
    Fit {
        #[arg(long)]
        returns: PathBuf,
        /// Tail scaling range `lo,hi` or `lo,max`, applied to both signs.
        #[arg(long)]
        range: ScalingRange,
        /// Fit the values as given instead of standardizing them first.
        #[arg(long)]
        raw: bool,
    },
    /// Print the built-in synthetic config.
    DefaultConfig,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SynthFile {
    Many { streams: Vec<SyntheticStreamSpec> },
    One(SyntheticStreamSpec),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(1)
        }
    }
}

/// Returns whether the run is degraded.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Analyze {
            config,
            calendar,
            timescales,
            out_dir,
        } => analyze(&config, calendar.as_deref(), &timescales, out_dir),
        Command::Synth { spec, out } => synth(&spec, &out).map(|()| false),
        Command::Fit {
            returns,
            range,
            raw,
        } => fit(&returns, range, raw),
        Command::DefaultConfig => {
            print!("{}", PipelineConfig::synthetic_default().to_toml());
            Ok(false)
        }
    }
}

fn analyze(
    path: &Path,
    calendar: Option<&Path>,
    timescales: &[String],
    out_dir: Option<PathBuf>,
) -> Result<bool> {
    let mut config = PipelineConfig::load(path)?;
    if let Some(cal) = calendar {
        let text = fs::read_to_string(cal).map_err(|e| Error::io(cal, e))?;
        config.set_calendar(SessionCalendar::parse(&text)?);
    }
    if !timescales.is_empty() {
        config.timescales = timescales
            .iter()
            .map(|t| TimescaleSpec::parse_list(t))
            .collect::<Result<Vec<_>>>()?
            .concat();
    }
    // relative paths in the config are relative to the config file
    let base = path.parent().unwrap_or(Path::new(""));
    if let InputConfig::Files { paths } = &mut config.input {
        for p in paths.iter_mut() {
            *p = base.join(&*p);
        }
    }
    let dir = out_dir.unwrap_or_else(|| base.join(&config.output_dir));

    let output = run_pipeline(&config)?;
    let written = write_outputs(&output, &dir)?;
    print_summary(&output.rows(TimescaleKind::Event), "event-time (trades)");
    print_summary(&output.rows(TimescaleKind::Clock), "clock-time (minutes)");
    let flags = output.flags();
    for f in &flags {
        eprintln!("warning: {f}");
    }
    println!("wrote {} files to {}", written.len(), dir.display());
    Ok(!flags.is_empty())
}

fn print_summary(rows: &[ReportRow], title: &str) {
    if rows.is_empty() {
        return;
    }
    let opt = |v: Option<f64>| v.map_or("-".to_owned(), |v| v.to_string());
    println!("{title}");
    println!(
        "{:>4} {:>8} {:>8} {:>6} {:>6}  {:>16} {:>14}  {:>16} {:>14}",
        "dt", "skew", "kurt", "L", "alpha", "pos range", "alpha+", "neg range", "alpha-"
    );
    for r in rows {
        println!(
            "{:>4} {:>8} {:>8} {:>6} {:>6}  {:>16} {:>14}  {:>16} {:>14}",
            r.dt,
            r.skewness,
            r.kurtosis,
            opt(r.scale),
            opt(r.alpha),
            r.pos_range,
            format!("{} ± {}", opt(r.alpha_pos), opt(r.alpha_pos_stderr)),
            r.neg_range,
            format!("{} ± {}", opt(r.alpha_neg), opt(r.alpha_neg_stderr)),
        );
    }
}

fn synth(spec_path: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path, e))?;
    let file: SynthFile = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {}", spec_path.display(), e.message())))?;
    let streams = match file {
        SynthFile::Many { streams } => streams,
        SynthFile::One(s) => vec![s],
    };
    let mut w = BufWriter::new(File::create(out).map_err(|e| Error::io(out, e))?);
    writeln!(
        w,
        "# instrument_id,YYYYMMDD,timestamp_centiseconds,best_bid,best_ask"
    )
    .map_err(|e| Error::io(out, e))?;
    for s in &streams {
        let events = generate_tick_stream(s)
            .map_err(|e| e.context(format!("stream {}", s.instrument_id)))?;
        write_ticks(&mut w, &events).map_err(|e| Error::io(out, e))?;
    }
    w.flush().map_err(|e| Error::io(out, e))
}

fn fit(path: &Path, range: ScalingRange, raw: bool) -> Result<bool> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut values =
        read_values(BufReader::new(file)).map_err(|e| e.context(path.display().to_string()))?;
    if !raw {
        let series = ReturnSeries {
            instrument_id: path.display().to_string(),
            timescale: TimescaleSpec::event(1)?,
            values,
        };
        values = standardize(&series)?.values;
    }
    let fit = FitConfig::default();
    let result = analyze_sample(
        &values,
        TimescaleSpec::event(1)?,
        &Binning::default(),
        &fit,
        (range, range),
    )?;
    let json = serde_json::json!({
        "n": result.n_returns,
        "standardized": !raw,
        "moments": result.moments,
        "student": result.student,
        "positive": result.positive,
        "negative": result.negative,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&json).expect("serializable")
    );
    let degraded = result.student.fitted().is_none_or(|f| !f.converged)
        || result.positive.fit.fitted().is_none()
        || result.negative.fit.fitted().is_none();
    Ok(degraded)
}
