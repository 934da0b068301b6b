//! `shaping`: amplitude shapers, rate and complexity analytics, and PAS
//! link simulation from the command line.
//!
//! Exit status is 0 on success, 1 on a domain error and 2 on a usage error.

mod util;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use shaping_core::ccdm::CcdmCodebook;
use shaping_core::distribution::kl_divergence;
use shaping_core::metrics::cost::{cost_report, CostInput, CostScheme};
use shaping_core::metrics::sweep::{
    air_sweep, g2c_minimum, g2c_sweep, mb_target, rate_loss_sweep, AirScheme,
};
use shaping_core::mpdm::MpdmCodebook;
use shaping_core::pas::sim::{simulate_fer, PasConfig};
use shaping_core::shaper::ShaperSpec;
use shaping_core::spsh::container::{self, StoredShaper};
use shaping_core::spsh::{min_radius, EssTrellis, Precision, SmTables, SphereShaper};
use shaping_core::{
    avg_energy, entropy, quantize_pmf, AmplitudeAlphabet, BitWord, BrgcLabeling, Composition,
    Error, Pmf, Result,
};

use util::{
    emit_json, overlay, parse_list, read_sequences, read_text, read_words, write_csv,
    write_sequences, write_words, Grid, ManifestBuilder,
};

#[derive(Parser)]
#[command(name = "shaping", version, about = "Finite-length amplitude shaping toolkit")]
struct Cli {
    /// Worker threads for sweeps and simulations (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Constant-composition distribution matching.
    #[command(subcommand)]
    Ccdm(CcdmCommand),
    /// Multiset-partition distribution matching.
    #[command(subcommand)]
    Mpdm(MpdmCommand),
    /// Sphere shaping: enumerative sphere shaping or shell mapping.
    #[command(subcommand)]
    Spsh(SpshCommand),
    /// Rate loss of every scheme against the blocklength (`rateloss.csv`).
    Rateloss(RatelossArgs),
    /// Finite-length achievable rate against SNR (`air.csv`).
    Air(AirArgs),
    /// Gap to capacity over the MB family (`g2c.csv`).
    G2c(G2cArgs),
    /// Serialism, storage and bit-operation bounds.
    Cost(CostArgs),
    /// Coded PAS link simulation.
    #[command(subcommand)]
    Pas(PasCommand),
}

/// Composition given directly or quantized from an MB target.
#[derive(Args, Clone, Serialize, Deserialize)]
struct DmTarget {
    /// Bits per ASK symbol; amplitudes are 1, 3, ..., 2^m - 1.
    #[arg(long, default_value_t = 3)]
    m: u32,
    /// Counts per amplitude, e.g. `95,69,37,15`.
    #[arg(long)]
    composition: Option<String>,
    /// Blocklength when quantizing an MB target.
    #[arg(long)]
    n: Option<usize>,
    /// Entropy of the MB target in bit.
    #[arg(long)]
    target_entropy: Option<f64>,
}

impl DmTarget {
    fn alphabet(&self) -> Result<AmplitudeAlphabet> {
        AmplitudeAlphabet::from_bits(self.m)
    }

    fn composition(&self) -> Result<Composition> {
        let alph = self.alphabet()?;
        let c = match (&self.composition, self.n, self.target_entropy) {
            (Some(c), _, _) => c.parse()?,
            (None, Some(n), Some(h)) => quantize_pmf(&mb_target(&alph, h)?, n)?,
            _ => {
                return Err(Error::InvalidArgument(
                    "give --composition, or --n with --target-entropy".into(),
                ))
            }
        };
        if c.num_letters() != alph.len() {
            return Err(Error::InvalidArgument(format!(
                "composition has {} entries, the alphabet {}",
                c.num_letters(),
                alph.len()
            )));
        }
        Ok(c)
    }
}

#[derive(Args, Serialize)]
struct Io {
    /// Input file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum CcdmCommand {
    /// Hex words to amplitude sequences.
    Encode {
        #[command(flatten)]
        target: DmTarget,
        #[command(flatten)]
        io: Io,
    },
    /// Amplitude sequences to hex words.
    Decode {
        #[command(flatten)]
        target: DmTarget,
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Args, Serialize)]
struct MpdmSource {
    /// Codebook JSON written by `mpdm build`.
    #[arg(long)]
    codebook: Option<PathBuf>,
    #[command(flatten)]
    target: DmTarget,
}

impl MpdmSource {
    fn load(&self) -> Result<MpdmCodebook> {
        match &self.codebook {
            Some(p) => serde_json::from_str(&read_text(p)?).map_err(|e| Error::Parse(e.to_string())),
            None => MpdmCodebook::build(&self.target.composition()?),
        }
    }
}

#[derive(Subcommand)]
enum MpdmCommand {
    /// Builds the codebook and writes it as JSON.
    Build {
        #[command(flatten)]
        target: DmTarget,
        #[arg(long)]
        out: PathBuf,
    },
    Encode {
        #[command(flatten)]
        source: MpdmSource,
        #[command(flatten)]
        io: Io,
    },
    Decode {
        #[command(flatten)]
        source: MpdmSource,
        #[command(flatten)]
        io: Io,
    },
    /// Input length, composition count, induced PMF, energy and rate loss.
    Stats {
        #[command(flatten)]
        source: MpdmSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Algo {
    Ess,
    Sm,
}

#[derive(Args, Clone, Serialize, Deserialize)]
struct SphereParams {
    #[arg(long, default_value_t = 3)]
    m: u32,
    #[arg(long)]
    n: Option<usize>,
    /// Maximum sequence energy.
    #[arg(long)]
    e_max: Option<u64>,
    /// Target input length; picks the smallest sphere when `--e-max` is absent.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "ess")]
    algo: Algo,
    /// `fp`, or `bp:n_m,n_p` for bounded precision.
    #[arg(long, default_value = "fp")]
    precision: String,
}

impl SphereParams {
    fn build(&self) -> Result<StoredShaper> {
        let alph = AmplitudeAlphabet::from_bits(self.m)?;
        let n = self.n.ok_or_else(|| Error::InvalidArgument("--n is required".into()))?;
        let e_max = match (self.e_max, self.k) {
            (Some(e), _) => e,
            (None, Some(k)) => min_radius(n, &alph, k)?,
            (None, None) => return Err(Error::InvalidArgument("give --e-max or --k".into())),
        };
        let precision: Precision = self.precision.parse()?;
        Ok(match self.algo {
            Algo::Ess => StoredShaper::Ess(EssTrellis::build(n, &alph, e_max, precision)?),
            Algo::Sm => StoredShaper::Sm(SmTables::build(n, &alph, e_max, precision)?),
        })
    }
}

#[derive(Args, Serialize)]
struct SphereSource {
    /// Table file written by `spsh build`.
    #[arg(long)]
    trellis: Option<PathBuf>,
    #[command(flatten)]
    params: SphereParams,
}

impl SphereSource {
    fn load(&self) -> Result<StoredShaper> {
        match &self.trellis {
            Some(p) => {
                let f = File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                container::read(BufReader::new(f))
            }
            None => self.params.build(),
        }
    }
}

#[derive(Subcommand)]
enum SpshCommand {
    /// Builds the trellis (ESS) or convolution tables (SM) in binary form.
    Build {
        #[command(flatten)]
        params: SphereParams,
        #[arg(long)]
        out: PathBuf,
    },
    Encode {
        #[command(flatten)]
        source: SphereSource,
        #[command(flatten)]
        io: Io,
    },
    Decode {
        #[command(flatten)]
        source: SphereSource,
        #[command(flatten)]
        io: Io,
    },
    /// Shells, input length, shaping rate, induced PMF and energy.
    Stats {
        #[command(flatten)]
        source: SphereSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Serialize, Deserialize)]
struct RatelossArgs {
    #[arg(long, default_value_t = 3)]
    m: u32,
    /// Entropy of the MB target in bit.
    #[arg(long, default_value_t = 1.75)]
    target_entropy: f64,
    /// Blocklengths, `start:step:end`.
    #[arg(long, default_value = "16:4:256")]
    n: Grid,
    #[arg(long, default_value = "rateloss.csv")]
    out: PathBuf,
    /// JSON object overriding any of the flags above.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
struct AirArgs {
    #[arg(long, default_value_t = 3)]
    m: u32,
    #[arg(long, default_value_t = 216)]
    n: usize,
    /// Input bits per block of the shaped schemes.
    #[arg(long, default_value_t = 378)]
    k: usize,
    /// SNR grid in dB, `start:step:end`.
    #[arg(long, default_value = "10:0.25:16")]
    snr: Grid,
    /// Comma-separated subset of uniform, ccdm, mpdm, ess, sm.
    #[arg(long, default_value = "uniform,ccdm,mpdm,ess,sm")]
    schemes: String,
    /// Also report the SNR at which each scheme reaches this rate.
    #[arg(long)]
    target: Option<f64>,
    #[arg(long, default_value = "air.csv")]
    out: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
struct G2cArgs {
    #[arg(long, default_value_t = 3)]
    m: u32,
    /// Transmission rate in bit/1-D.
    #[arg(long, default_value_t = 2.25)]
    rate: f64,
    /// Grid of H(X) in bit.
    #[arg(long, default_value = "2.3:0.01:3")]
    hx: Grid,
    #[arg(long, default_value = "g2c.csv")]
    out: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CostAlgo {
    Ccdm,
    Sr,
    Ess,
    Sm,
}

#[derive(Args, Serialize, Deserialize)]
struct CostArgs {
    #[arg(long, value_enum)]
    scheme: CostAlgo,
    #[arg(long, default_value_t = 3)]
    m: u32,
    #[arg(long)]
    n: usize,
    /// Sphere energy (ESS/SM); shells and shaping rate follow from it.
    #[arg(long)]
    e_max: Option<u64>,
    /// Input length (CCDM/SR).
    #[arg(long)]
    k: Option<usize>,
    /// Ones in the binary composition (SR).
    #[arg(long)]
    n1: Option<usize>,
    /// `fp`, or `bp:n_m,n_p`.
    #[arg(long, default_value = "fp")]
    precision: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PasCommand {
    /// FER/BER over AWGN for every SNR in the configuration (`fer.csv`).
    Simulate {
        /// Simulation configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "fer.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Ccdm(c) => ccdm(c),
        Command::Mpdm(c) => mpdm(c),
        Command::Spsh(c) => spsh(c),
        Command::Rateloss(a) => rateloss(overlay_args(a)?),
        Command::Air(a) => air(overlay_args(a)?),
        Command::G2c(a) => g2c(overlay_args(a)?),
        Command::Cost(a) => cost(overlay_args(a)?),
        Command::Pas(PasCommand::Simulate { config, out }) => pas_simulate(&config, &out),
    }
}

trait HasConfig: Serialize + for<'de> Deserialize<'de> {
    fn config(&mut self) -> Option<PathBuf>;
}

macro_rules! has_config {
    ($($t:ty),*) => {$(
        impl HasConfig for $t {
            fn config(&mut self) -> Option<PathBuf> {
                self.config.take()
            }
        }
    )*};
}
has_config!(RatelossArgs, AirArgs, G2cArgs, CostArgs);

fn overlay_args<T: HasConfig>(mut a: T) -> Result<T> {
    let cfg = a.config();
    overlay(a, cfg.as_deref())
}

fn ccdm(cmd: CcdmCommand) -> Result<()> {
    match cmd {
        CcdmCommand::Encode { target, io } => {
            let cb = CcdmCodebook::new(target.composition()?)?;
            let seqs = read_words(&io.input, cb.k())?
                .iter()
                .map(|w| cb.encode(w))
                .collect::<Result<Vec<_>>>()?;
            let m = ManifestBuilder::new("ccdm encode", &json!({"target": target, "io": io}), None);
            write_sequences(&io.out, &seqs)?;
            m.finish(&[&io.out])
        }
        CcdmCommand::Decode { target, io } => {
            let cb = CcdmCodebook::new(target.composition()?)?;
            let words = read_sequences(&io.input)?
                .iter()
                .map(|s| cb.decode(s))
                .collect::<Result<Vec<_>>>()?;
            let m = ManifestBuilder::new("ccdm decode", &json!({"target": target, "io": io}), None);
            write_words(&io.out, &words)?;
            m.finish(&[&io.out])
        }
    }
}

fn mpdm(cmd: MpdmCommand) -> Result<()> {
    match cmd {
        MpdmCommand::Build { target, out } => {
            let m = ManifestBuilder::new("mpdm build", &json!({"target": target}), None);
            let cb = MpdmCodebook::build(&target.composition()?)?;
            emit_json(Some(&out), &cb)?;
            m.finish(&[&out])
        }
        MpdmCommand::Encode { source, io } => {
            let cb = source.load()?;
            let seqs = read_words(&io.input, cb.k())?
                .iter()
                .map(|w| cb.encode(w))
                .collect::<Result<Vec<_>>>()?;
            let m = ManifestBuilder::new("mpdm encode", &json!({"source": source, "io": io}), None);
            write_sequences(&io.out, &seqs)?;
            m.finish(&[&io.out])
        }
        MpdmCommand::Decode { source, io } => {
            let cb = source.load()?;
            let words = read_sequences(&io.input)?
                .iter()
                .map(|s| cb.decode(s))
                .collect::<Result<Vec<_>>>()?;
            let m = ManifestBuilder::new("mpdm decode", &json!({"source": source, "io": io}), None);
            write_words(&io.out, &words)?;
            m.finish(&[&io.out])
        }
        MpdmCommand::Stats { source, out } => {
            let cb = source.load()?;
            let m = ManifestBuilder::new("mpdm stats", &json!({"source": source}), None);
            let stats = cb.stats();
            let target = Pmf::from_composition(cb.target());
            let report = json!({
                "n": cb.n(),
                "target": cb.target().counts(),
                "stats": stats,
                "kl_to_target": kl_divergence(stats.pmf.probs(), target.probs()),
            });
            emit_json(out.as_deref(), &report)?;
            finish_optional(m, out.as_deref())
        }
    }
}

fn finish_optional(m: ManifestBuilder, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => m.finish(&[p]),
        None => Ok(()),
    }
}

fn spsh(cmd: SpshCommand) -> Result<()> {
    match cmd {
        SpshCommand::Build { params, out } => {
            let m = ManifestBuilder::new("spsh build", &params, None);
            let stored = params.build()?;
            let f = File::create(&out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
            container::write(&mut BufWriter::new(f), &stored)?;
            m.finish(&[&out])
        }
        SpshCommand::Encode { source, io } => {
            let stored = source.load()?;
            let s = stored.as_shaper();
            let seqs = read_words(&io.input, s.k())?
                .iter()
                .map(|w| s.encode(w))
                .collect::<Result<Vec<_>>>()?;
            let m = ManifestBuilder::new("spsh encode", &json!({"source": source, "io": io}), None);
            write_sequences(&io.out, &seqs)?;
            m.finish(&[&io.out])
        }
        SpshCommand::Decode { source, io } => {
            let stored = source.load()?;
            let s = stored.as_shaper();
            let words: Vec<BitWord> = read_sequences(&io.input)?
                .iter()
                .map(|q| s.decode(q))
                .collect::<Result<_>>()?;
            let m = ManifestBuilder::new("spsh decode", &json!({"source": source, "io": io}), None);
            write_words(&io.out, &words)?;
            m.finish(&[&io.out])
        }
        SpshCommand::Stats { source, out } => {
            let stored = source.load()?;
            let m = ManifestBuilder::new("spsh stats", &json!({"source": source}), None);
            let s = stored.as_shaper();
            let k = source.params.k.filter(|_| source.trellis.is_none()).unwrap_or(s.k());
            let (pmf, energy) = s.induced_pmf_k(k)?;
            let report = json!({
                "algo": match stored { StoredShaper::Ess(_) => "ess", StoredShaper::Sm(_) => "sm" },
                "n": s.n(),
                "e_max": s.e_max(),
                "precision": s.precision().to_string(),
                "shells": s.num_shells(),
                "size": s.size().to_string(),
                "k_max": s.k(),
                "k": k,
                "shaping_rate": s.shaping_rate(),
                "pmf": pmf.probs(),
                "entropy": entropy(&pmf),
                "energy": energy,
                "rate_loss": entropy(&pmf) - k as f64 / s.n() as f64,
            });
            emit_json(out.as_deref(), &report)?;
            finish_optional(m, out.as_deref())
        }
    }
}

fn rateloss(a: RatelossArgs) -> Result<()> {
    let m = ManifestBuilder::new("rateloss", &a, None);
    let alph = AmplitudeAlphabet::from_bits(a.m)?;
    let target = mb_target(&alph, a.target_entropy)?;
    let rows = rate_loss_sweep(&alph, &target, &a.n.integers()?)?;
    write_csv(&a.out, &rows)?;
    m.finish(&[&a.out])
}

fn air(a: AirArgs) -> Result<()> {
    let m = ManifestBuilder::new("air", &a, None);
    let alph = AmplitudeAlphabet::from_bits(a.m)?;
    let lab = BrgcLabeling::for_alphabet(&alph)?;
    let mut schemes = Vec::new();
    for name in parse_list::<String>(&a.schemes)? {
        let s = match name.as_str() {
            "uniform" => AirScheme::uniform(&alph, a.n)?,
            other => {
                let spec: ShaperSpec = serde_json::from_value(json!({ "scheme": other }))
                    .map_err(|_| Error::InvalidArgument(format!("unknown scheme `{other}`")))?;
                if matches!(spec, ShaperSpec::Uniform | ShaperSpec::Identity) {
                    AirScheme::uniform(&alph, a.n)?
                } else {
                    AirScheme::of_shaper(&spec.build(&alph, a.n, a.k)?)?
                }
            }
        };
        schemes.push(s);
    }
    let rows = air_sweep(&schemes, &a.snr.values(), &lab);
    write_csv(&a.out, &rows)?;
    if let Some(t) = a.target {
        let req: Vec<_> = schemes
            .iter()
            .map(|s| {
                s.required_snr_db(t, &lab)
                    .map(|snr| json!({"scheme": s.name, "snr_db": snr, "energy": avg_energy(&s.pmf, &alph)}))
            })
            .collect::<Result<_>>()?;
        emit_json(None, &json!({ "target_air": t, "required": req }))?;
    }
    m.finish(&[&a.out])
}

fn g2c(a: G2cArgs) -> Result<()> {
    let m = ManifestBuilder::new("g2c", &a, None);
    let alph = AmplitudeAlphabet::from_bits(a.m)?;
    let hx: Vec<f64> = a.hx.values().into_iter().filter(|&h| h > a.rate).collect();
    let rows = g2c_sweep(&alph, a.rate, &hx)?;
    write_csv(&a.out, &rows)?;
    let best = g2c_minimum(&alph, a.rate)?;
    let uniform = shaping_core::metrics::sweep::g2c_point(&alph, a.rate, a.m as f64)?;
    emit_json(
        None,
        &json!({
            "minimum": best,
            "uniform": uniform,
            "shaping_gain_db": uniform.delta_snr_db - best.delta_snr_db,
        }),
    )?;
    m.finish(&[&a.out])
}

fn cost(a: CostArgs) -> Result<()> {
    let m = ManifestBuilder::new("cost", &a, None);
    let alph = AmplitudeAlphabet::from_bits(a.m)?;
    let precision: Precision = a.precision.parse()?;
    let (scheme, input) = match a.scheme {
        CostAlgo::Ess | CostAlgo::Sm => {
            let e_max = a
                .e_max
                .ok_or_else(|| Error::InvalidArgument("--e-max is required for ess and sm".into()))?;
            let t = EssTrellis::build(a.n, &alph, e_max, Precision::Full)?;
            let scheme = if matches!(a.scheme, CostAlgo::Ess) { CostScheme::Ess } else { CostScheme::Sm };
            let input = CostInput {
                n: a.n,
                k: t.k(),
                n_a: alph.len(),
                shells: t.num_shells(),
                shaping_rate: t.shaping_rate(),
                n_1: 0,
            };
            (scheme, input)
        }
        CostAlgo::Ccdm | CostAlgo::Sr => {
            let k = a.k.ok_or_else(|| Error::InvalidArgument("--k is required for ccdm and sr".into()))?;
            let scheme = if matches!(a.scheme, CostAlgo::Ccdm) { CostScheme::AcCcdm } else { CostScheme::SrDm };
            let n_1 = a.n1.unwrap_or(0).min(a.n);
            let input = CostInput {
                n: a.n,
                k,
                n_a: alph.len(),
                shells: 0,
                shaping_rate: k as f64 / a.n as f64,
                n_1,
            };
            (scheme, input)
        }
    };
    let report = cost_report(scheme, &input, precision);
    emit_json(
        a.out.as_deref(),
        &json!({ "input": input, "report": report, "storage_kb": report.storage_kb() }),
    )?;
    finish_optional(m, a.out.as_deref())
}

fn pas_simulate(config: &Path, out: &Path) -> Result<()> {
    let cfg = PasConfig::from_json(&read_text(config)?)?;
    let m = ManifestBuilder::new("pas simulate", &json!({ "config": cfg, "config_path": config }), Some(cfg.seed));
    let base = config.parent().unwrap_or(Path::new("."));
    let (sys, rates) = cfg.system(base)?;
    eprintln!(
        "n = {}, k = {}, gamma = {}, code rate = {:.4}, info bits per frame = {}",
        rates.n,
        rates.k,
        rates.gamma,
        sys.code().rate(),
        sys.info_bits()
    );
    let records = simulate_fer(&cfg, &sys)?;
    write_csv(out, &records)?;
    m.finish(&[out])
}
