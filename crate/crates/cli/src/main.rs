use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use log::error;
use spacefield::space_data::Sport;
use spacefield_cli::config::{parse_grid, FrameRange, MatchInput, RunConfig, SpaceModel, XiRange, CONFIG_ENV};
use spacefield_cli::{run_batch, sample};

#[derive(Debug, Parser)]
#[command(name = "spacefield", version, about = "Spatial valuation surfaces from tracking data")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// ppcf, obso, wuppcf or bimos
    #[arg(value_name = "MODEL")]
    model: Option<String>,

    /// Alias of the positional model argument.
    #[arg(long)]
    space_model: Option<String>,

    #[arg(long, value_parser = parse_sport)]
    sport: Option<Sport>,
    #[arg(long)]
    provider: Option<String>,
    #[arg(long)]
    event_data: Option<PathBuf>,
    #[arg(long)]
    tracking_home: Option<PathBuf>,
    #[arg(long)]
    tracking_away: Option<PathBuf>,
    /// Directory whose subdirectories each hold one match.
    #[arg(long)]
    input_dir: Option<PathBuf>,
    #[arg(long)]
    out_path: Option<PathBuf>,
    /// Cells along length and width, e.g. 50x32.
    #[arg(long)]
    grid: Option<String>,
    /// Half-open frame range a:b.
    #[arg(long)]
    frames: Option<String>,
    #[arg(long)]
    frame_step: Option<usize>,
    #[arg(long)]
    receiver: Option<String>,
    #[arg(long)]
    initiation_frame: Option<usize>,
    /// min:max:step in frames.
    #[arg(long, allow_hyphen_values = true)]
    xi_range: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    render: bool,
    /// mix or max
    #[arg(long)]
    bimos_combine: Option<String>,
    #[arg(long)]
    pass_speed: Option<f64>,
    #[arg(long)]
    dribble_speed: Option<f64>,
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic Ultimate match (events.csv, tracking_home.csv, tracking_away.csv).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        frames: usize,
    },
}

fn parse_sport(s: &str) -> Result<Sport, String> {
    match s.to_ascii_lowercase().as_str() {
        "ultimate" => Ok(Sport::Ultimate),
        "soccer" => Ok(Sport::Soccer),
        "basketball" => Ok(Sport::Basketball),
        other => Err(format!("unknown sport `{other}`")),
    }
}

impl Cli {
    /// File values first, then flags on top.
    fn run_config(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.space_model.as_ref().or(self.model.as_ref()) {
            c.space_model = m.parse::<SpaceModel>()?;
        }
        if let Some(s) = self.sport {
            c.sport = s;
        }
        if let Some(p) = &self.provider {
            c.provider = p.clone();
        }
        match (&self.event_data, &self.tracking_home, &self.tracking_away) {
            (Some(e), Some(h), Some(a)) => {
                let id = e
                    .parent()
                    .and_then(|d| d.file_name())
                    .map_or_else(|| "match".to_string(), |n| n.to_string_lossy().into_owned());
                c.inputs = vec![MatchInput {
                    id,
                    event_data: e.clone(),
                    tracking_home: h.clone(),
                    tracking_away: a.clone(),
                }];
            }
            (None, None, None) => {}
            _ => anyhow::bail!("--event-data, --tracking-home and --tracking-away go together"),
        }
        if let Some(d) = &self.input_dir {
            c.input_dir = Some(d.clone());
        }
        if let Some(o) = &self.out_path {
            c.out_path = o.clone();
        }
        if let Some(g) = &self.grid {
            c.grid = Some(parse_grid(g)?);
        }
        if let Some(f) = &self.frames {
            c.frames = f.parse::<FrameRange>()?;
        }
        if let Some(s) = self.frame_step {
            c.frame_step = s;
        }
        if let Some(r) = &self.receiver {
            c.receiver = Some(r.clone());
        }
        if let Some(t) = self.initiation_frame {
            c.initiation_frame = Some(t);
        }
        if let Some(x) = &self.xi_range {
            c.xi_range = Some(x.parse::<XiRange>()?);
        }
        if self.jobs.is_some() {
            c.jobs = self.jobs;
        }
        c.render |= self.render;
        if let Some(b) = &self.bimos_combine {
            c.params.bimos_combine = Some(b.clone());
        }
        if let Some(v) = self.pass_speed {
            c.params.ball_speed = Some(v);
        }
        if let Some(v) = self.dribble_speed {
            c.params.dribble_speed = Some(v);
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(Command::Synth { out, seed, frames }) = &cli.command {
        let input = sample::generate(*seed, *frames).write_to(out)?;
        println!("{}", input.event_data.display());
        return Ok(true);
    }
    let config = cli.run_config().context("invalid configuration")?;
    let outcome = run_batch(&config)?;
    println!(
        "{} artifacts from {} matches ({} failed); manifest {}",
        outcome.manifest.len(),
        outcome.succeeded.len(),
        outcome.failures.len(),
        outcome.manifest_path.display()
    );
    Ok(!outcome.all_failed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
