use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use qcpd_core::experiments::{
    distance_table, seeding, sweep_k, sweep_n, sweep_overlap, ChangePoint, MonteCarlo, Parallelism,
    SweepTable,
};
use qcpd_core::pipeline::{
    generate_stream, postselect_bins, read_events, simulate_stream_success, write_bin_outcomes, write_events,
    EventRates, TimingConfig,
};
use qcpd_core::quantum::QubitState;
use qcpd_core::strategies::run_trial;
use qcpd_core::{BinaryMeasurement, SourceConfig, TrialRecord};

use crate::args::{
    Format, GenerateArgs, MonteCarloArgs, PostselectArgs, RateArgs, StreamRunArgs, TimingArgs, TrialArgs,
};
use crate::error::CliError;

/// Where and how a command writes its data files.
pub struct Output<'a> {
    pub dir: &'a Path,
    pub format: Format,
    pub written: Vec<PathBuf>,
}

impl Output<'_> {
    fn create(&mut self, file_name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        fs::create_dir_all(self.dir).map_err(|e| CliError::io(self.dir, e))?;
        let path = self.dir.join(file_name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok((path, BufWriter::new(file)))
    }

    fn data_file(&mut self, stem: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        let ext = self.format.extension();
        self.create(&format!("{stem}.{ext}"))
    }

    fn json<T: Serialize>(&mut self, stem: &str, value: &T) -> Result<(), CliError> {
        let (path, mut w) = self.data_file(stem)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(&path, e.into()))?;
        finish(&path, w)
    }
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<(), CliError> {
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn monte_carlo(mc: &MonteCarloArgs) -> MonteCarlo {
    MonteCarlo { trials: mc.trials, epsilon: mc.epsilon, master_seed: mc.seed, bootstrap: mc.bootstrap }
}

pub fn write_table(out: &mut Output, stem: &str, table: &SweepTable) -> Result<(), CliError> {
    let (path, mut w) = out.data_file(stem)?;
    match out.format {
        Format::Csv => table.write_csv(&mut w),
        Format::Json => table.write_json(&mut w),
    }
    .map_err(|e| CliError::writing(&path, e))?;
    match out.format {
        Format::Json => finish(&path, w)?,
        Format::Csv => w.flush().map_err(|e| CliError::io(&path, e))?,
    }
    print!("{}", table.summary());
    Ok(())
}

pub fn sweep_k_cmd(a: &crate::args::SweepKArgs, par: &Parallelism, out: &mut Output) -> Result<(), CliError> {
    let table = sweep_k(&a.strategies, a.n, a.c2, &monte_carlo(&a.mc), par)?;
    write_table(out, "sweep-k", &table)
}

pub fn sweep_overlap_cmd(
    a: &crate::args::OverlapArgs,
    par: &Parallelism,
    out: &mut Output,
) -> Result<(), CliError> {
    let table = sweep_overlap(&a.strategies, a.n, &a.grid.0, &monte_carlo(&a.mc), par)?;
    write_table(out, "sweep-overlap", &table)
}

pub fn sweep_n_cmd(a: &crate::args::SweepNArgs, par: &Parallelism, out: &mut Output) -> Result<(), CliError> {
    let table = sweep_n(&a.n.0, a.c2, &monte_carlo(&a.mc), par)?;
    write_table(out, "sweep-n", &table)
}

pub fn distances_cmd(
    a: &crate::args::DistanceArgs,
    par: &Parallelism,
    out: &mut Output,
) -> Result<(), CliError> {
    let table = distance_table(a.n, &a.grid.0, &monte_carlo(&a.mc), par)?;
    write_table(out, "distances", &table)
}

fn angle_degrees(meas: &BinaryMeasurement) -> String {
    meas.zero_angle().map(|a| a.to_degrees().to_string()).unwrap_or_default()
}

/// One row per step: the outcome and basis of that photon, the posterior
/// after it (BI only) and, on the last row, the guess. Row 0 is the
/// uniform start.
fn write_trial_csv<W: Write>(w: W, rec: &TrialRecord) -> csv::Result<()> {
    let n = rec.config.n;
    let with_prior = !rec.prior_history.is_empty();
    let mut w = csv::Writer::from_writer(w);
    let mut header = vec!["step".to_string(), "outcome".into(), "basis_angle_deg".into()];
    if with_prior {
        header.extend((1..=n).map(|k| format!("eta_{k}")));
    }
    header.push("guess".into());
    w.write_record(&header)?;
    for step in 0..=n {
        let mut row = vec![step.to_string()];
        if step == 0 {
            row.extend([String::new(), String::new()]);
        } else {
            row.push((rec.outcomes[step - 1] as u8).to_string());
            row.push(angle_degrees(&rec.bases[step - 1]));
        }
        if with_prior {
            row.extend(rec.prior_history[step].eta.iter().map(|p| p.to_string()));
        }
        row.push(if step == n { rec.guess.to_string() } else { String::new() });
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn trial_cmd(a: &TrialArgs, out: &mut Output) -> Result<(), CliError> {
    let config = SourceConfig::new(a.n, a.k, a.c2)?;
    let mut rng = seeding::rng_from_seed(a.seed);
    let mut rec = run_trial(a.strategy, &config, a.epsilon, &mut rng)?;
    rec.seed = Some(a.seed);
    match out.format {
        Format::Json => out.json("trial", &rec)?,
        Format::Csv => {
            let (path, w) = out.data_file("trial")?;
            write_trial_csv(w, &rec).map_err(|e| CliError::io(&path, e.into()))?;
        }
    }
    let bits: String = rec.outcomes.iter().map(|&o| if o { '1' } else { '0' }).collect();
    println!("strategy {}  n {}  c² {}  k {}", a.strategy, a.n, a.c2, a.k);
    println!("outcomes {bits}");
    match rec.prior_history.last() {
        Some(p) => {
            println!("guess {}  (posterior {:.4})  {}", rec.guess, p.get(rec.guess), verdict(rec.success))
        }
        None => println!("guess {}  {}", rec.guess, verdict(rec.success)),
    }
    Ok(())
}

fn verdict(success: bool) -> &'static str {
    if success {
        "correct"
    } else {
        "wrong"
    }
}

fn timing(t: &TimingArgs, n: usize) -> Result<TimingConfig, CliError> {
    let cfg = TimingConfig {
        trigger_interval: t.trigger_interval,
        chopper_period: t.chopper_period,
        bin_width: t.bin_width,
        coincidence_window: t.window,
        n_bins: n,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn rates(r: &RateArgs) -> Result<EventRates, CliError> {
    let rates = EventRates { pairs_per_bin: r.pairs_per_bin, background_per_ms: r.background };
    rates.validate()?;
    Ok(rates)
}

pub fn generate_cmd(a: &GenerateArgs, out: &mut Output) -> Result<(), CliError> {
    let cfg = timing(&a.timing, a.n)?;
    let source = SourceConfig::new(a.n, a.k, a.c2)?;
    let theta = a.basis_angle.to_radians();
    let basis = BinaryMeasurement::from_zero_state(&QubitState { amp_h: theta.cos(), amp_v: theta.sin() });
    let mut rng = seeding::rng_from_seed(a.seed);
    let stream = generate_stream(&cfg, &source, a.frames, &rates(&a.rates)?, |_, _| basis, &mut rng)?;

    // Event files are CSV whatever the data format.
    let (path, w) = out.create("events.csv")?;
    write_events(w, &stream.events).map_err(|e| CliError::reading(&path, e))?;
    println!("{} events in {} frames -> {}", stream.events.len(), a.frames, path.display());
    for (i, frame) in stream.planted.iter().enumerate() {
        let s: String = frame.iter().map(|o| o.map_or('-', |b| if b { '1' } else { '0' })).collect();
        println!("frame {i}: planted {s}");
    }
    Ok(())
}

pub fn postselect_cmd(a: &PostselectArgs, out: &mut Output) -> Result<(), CliError> {
    let cfg = timing(&a.timing, a.n)?;
    let file = File::open(&a.input).map_err(|e| CliError::io(&a.input, e))?;
    let events = read_events(file).map_err(|e| CliError::reading(&a.input, e))?;
    let frames = postselect_bins(&events, &cfg).map_err(|e| CliError::reading(&a.input, e))?;
    match out.format {
        Format::Json => out.json("outcomes", &frames)?,
        Format::Csv => {
            let (path, w) = out.data_file("outcomes")?;
            write_bin_outcomes(w, &frames).map_err(|e| CliError::reading(&path, e))?;
        }
    }
    for f in &frames {
        let s: String = f.outcomes().iter().map(|o| o.map_or('-', |b| if b { '1' } else { '0' })).collect();
        println!("trigger {:>12} ns: {s}", f.trigger_timestamp);
    }
    Ok(())
}

#[derive(Serialize)]
struct StreamRow {
    strategy: String,
    n: usize,
    c_squared: f64,
    k: Option<usize>,
    trials: usize,
    invalid: usize,
    successes: usize,
    mean: f64,
    std_error: f64,
    seed: u64,
}

pub fn stream_run_cmd(a: &StreamRunArgs, par: &Parallelism, out: &mut Output) -> Result<(), CliError> {
    let cfg = timing(&a.timing, a.n)?;
    let rates = rates(&a.rates)?;
    let k = a.k.map_or(ChangePoint::Averaged, ChangePoint::Fixed);
    let mut rows = Vec::new();
    for &strategy in &a.strategies {
        let e = simulate_stream_success(strategy, &cfg, a.c2, k, a.trials, &rates, a.seed, par)?;
        rows.push(StreamRow {
            strategy: strategy.tag().into(),
            n: e.n,
            c_squared: e.c_squared,
            k: e.k,
            trials: e.trials,
            invalid: e.invalid,
            successes: e.successes,
            mean: e.mean,
            std_error: e.std_error,
            seed: e.seed,
        });
    }
    match out.format {
        Format::Json => out.json("pipeline-run", &rows)?,
        Format::Csv => {
            let (path, w) = out.data_file("pipeline-run")?;
            let mut w = csv::Writer::from_writer(w);
            for r in &rows {
                w.serialize(r).map_err(|e| CliError::io(&path, e.into()))?;
            }
            w.flush().map_err(|e| CliError::io(&path, e))?;
        }
    }
    for r in &rows {
        println!(
            "{:>3}  success {:.5} ± {:.5}  ({} valid, {} invalid)",
            r.strategy, r.mean, r.std_error, r.trials, r.invalid
        );
    }
    Ok(())
}
