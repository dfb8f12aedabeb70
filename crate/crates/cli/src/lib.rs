//! Command implementations behind the `slmut` binary.
//!
//! Every command that writes an output directory also writes the resolved
//! configuration there as `config.json`. Exit codes: 0 success, 1 user or
//! input error, 2 environment error (prediction service unreachable).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use slmut::fixtures::{self, BenchFile, BenchModel, FixtureError};
use slmut::harness::{
    compute_kill_matrix, mutation_score, run_experiment, select_minimal_tests, tie_order,
    ExperimentConfig, HarnessError, KillMatrix, Notion, SuiteConfig, DEFAULT_REPETITIONS,
    DEFAULT_TOLERANCE,
};
use slmut::ingest::{build_corpus, parse_model, read_jsonl, write_jsonl, ModelFormat, DEFAULT_MASK_RATE};
use slmut::ir::{render_ir_file, ModelIR, Severity, SiteTarget};
use slmut::masking::{enumerate_sites, mask, MaskConfig, DEFAULT_CONTEXT_WINDOW};
use slmut::mutgen::{
    classify, generate_mlm, generate_operators, Approach, GenerateError, MlmConfig, MutantSet, MutationPattern,
    DEFAULT_TOP_K,
};
use slmut::predictor::{OfflinePredictor, Predictor, PredictorError, RemoteConfig, RemotePredictor};
use slmut::reqmon::{check, RequirementSet};
use slmut::sim::{execute, TestCase};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_ENVIRONMENT: i32 = 2;

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl CliError {
    fn user(error: impl Into<anyhow::Error>) -> Self {
        CliError { code: EXIT_USER, error: error.into() }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        CliError::user(error)
    }
}

impl From<PredictorError> for CliError {
    fn from(e: PredictorError) -> Self {
        let code = if matches!(e, PredictorError::Unavailable(_)) { EXIT_ENVIRONMENT } else { EXIT_USER };
        CliError { code, error: e.into() }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Generate(g) => g.into(),
            other => CliError::user(other),
        }
    }
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        let code = if matches!(e.source, PredictorError::Unavailable(_)) { EXIT_ENVIRONMENT } else { EXIT_USER };
        CliError { code, error: e.into() }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "slmut", version, about = "Mask-and-predict mutation testing for block-diagram models")]
pub struct Cli {
    /// Worker threads for simulation and compile checks (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert an XML or JSON model to the canonical IR JSON file.
    Convert {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a masked JSON-lines training corpus from model files.
    Corpus {
        #[arg(required = true)]
        models: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MASK_RATE)]
        mask_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = slmut::masking::DEFAULT_PLACEHOLDER)]
        placeholder: String,
    },
    /// Print the masked sequence for one site, or list the sites.
    Mask {
        model: PathBuf,
        /// Block id of the site; without it the sites are listed.
        #[arg(long)]
        block: Option<String>,
        /// Property key; omit to mask the block name.
        #[arg(long)]
        key: Option<String>,
        #[arg(long, default_value_t = DEFAULT_CONTEXT_WINDOW)]
        window: usize,
        #[arg(long)]
        include_names: bool,
    },
    /// Generate mutants with the predictor, the rule operators, or both.
    Mutate {
        model: PathBuf,
        #[arg(short, long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = ApproachArg::Both)]
        approach: ApproachArg,
        /// Also write every mutant as an IR JSON file.
        #[arg(long)]
        export_models: bool,
        #[command(flatten)]
        settings: Settings,
    },
    /// Simulate a model on a test case and print the trace as CSV.
    Simulate {
        model: PathBuf,
        /// Test case JSON file.
        #[arg(long)]
        test: PathBuf,
        /// Requirements whose probes are recorded and whose verdicts are printed.
        #[arg(long)]
        requirements: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute classical and requirements-aware kill matrices.
    KillMatrix {
        model: PathBuf,
        /// Mutant report written by `mutate`.
        #[arg(long)]
        mutants: PathBuf,
        /// Test suite JSON (array of test cases).
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        requirements: Option<PathBuf>,
        #[arg(short, long)]
        out_dir: PathBuf,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Greedy minimal test selection over a kill-matrix CSV.
    SelectTests {
        /// 0/1 CSV with a `test` column and one column per mutant.
        matrix: PathBuf,
        /// Shuffle greedy ties with this seed (identity order when absent).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        repetition: usize,
    },
    /// Full comparison of predictor and operator mutants over a bench.
    Experiment {
        #[arg(short, long)]
        out_dir: PathBuf,
        /// Bench file; the embedded fixture bench when absent.
        #[arg(long)]
        bench: Option<PathBuf>,
        /// Only run bench models with these names.
        #[arg(long = "model")]
        models: Vec<String>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Re-classify the mutants of a report and count patterns.
    Classify { mutants: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApproachArg {
    Mlm,
    Op,
    Both,
}

/// Settings shared by `mutate` and `experiment`; flags override `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// JSON file with any of the fields of the resolved `config.json`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `offline` or the base URL of a prediction service.
    #[arg(long)]
    pub predictor: Option<String>,
    /// Training corpus (JSON lines) for the offline predictor.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub context_window: Option<usize>,
    #[arg(long)]
    pub include_names: Option<bool>,
    #[arg(long)]
    pub suite_size: Option<usize>,
    #[arg(long)]
    pub candidates_per_pick: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
}

/// Fully resolved settings; written as `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub predictor: String,
    pub corpus: Option<PathBuf>,
    pub top_k: usize,
    pub context_window: usize,
    pub include_names: bool,
    pub suite_size: usize,
    pub candidates_per_pick: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub repetitions: usize,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let suite = SuiteConfig::default();
        RunConfig {
            predictor: "offline".into(),
            corpus: None,
            top_k: DEFAULT_TOP_K,
            context_window: DEFAULT_CONTEXT_WINDOW,
            include_names: false,
            suite_size: suite.size,
            candidates_per_pick: suite.candidates_per_pick,
            seed: suite.seed,
            tolerance: DEFAULT_TOLERANCE,
            repetitions: DEFAULT_REPETITIONS,
            jobs: 0,
        }
    }
}

impl RunConfig {
    pub fn resolve(settings: &Settings, jobs: usize) -> CliResult<RunConfig> {
        let mut cfg = match &settings.config {
            Some(path) => serde_json::from_str(&read(path)?)
                .with_context(|| format!("config {}", path.display()))?,
            None => RunConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {$(
                if let Some(v) = settings.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        apply!(predictor, top_k, context_window, include_names, suite_size, candidates_per_pick, seed, tolerance, repetitions);
        if settings.corpus.is_some() {
            cfg.corpus = settings.corpus.clone();
        }
        cfg.jobs = jobs;
        if cfg.top_k == 0 {
            return Err(CliError::user(anyhow!("top_k must be at least 1")));
        }
        if cfg.suite_size == 0 || cfg.repetitions == 0 {
            return Err(CliError::user(anyhow!("suite_size and repetitions must be at least 1")));
        }
        if !(cfg.tolerance >= 0.0) {
            return Err(CliError::user(anyhow!("tolerance must be a non-negative number")));
        }
        Ok(cfg)
    }

    pub fn mlm(&self) -> MlmConfig {
        MlmConfig { top_k: self.top_k, context_window: self.context_window, include_names: self.include_names }
    }

    pub fn experiment(&self, duration_steps: usize) -> ExperimentConfig {
        ExperimentConfig {
            mlm: self.mlm(),
            suite: SuiteConfig {
                size: self.suite_size,
                candidates_per_pick: self.candidates_per_pick,
                duration_steps,
                seed: self.seed,
            },
            tolerance: self.tolerance,
            repetitions: self.repetitions,
        }
    }

    /// The configured predictor; remote services are handshaken up front.
    pub fn predictor(&self, fallback_corpus: &[ModelIR]) -> CliResult<Box<dyn Predictor>> {
        if self.predictor == "offline" {
            let mut p = OfflinePredictor::new();
            match &self.corpus {
                Some(path) => {
                    let records = read_jsonl(&read(path)?).map_err(CliError::user)?;
                    p.fit_corpus(&records).map_err(CliError::user)?;
                }
                None => p.fit_models(fallback_corpus),
            }
            return Ok(Box::new(p));
        }
        if !(self.predictor.starts_with("http://") || self.predictor.starts_with("https://")) {
            return Err(CliError::user(anyhow!(
                "predictor must be `offline` or an http(s) URL, got `{}`",
                self.predictor
            )));
        }
        let remote = RemotePredictor::new(RemoteConfig::new(&self.predictor));
        remote.handshake()?;
        Ok(Box::new(remote))
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(CliError::user)
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::user(anyhow!(e)))?;
    text.push('\n');
    write(path, &text)
}

/// Write to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::user(anyhow!("stdout: {e}"))),
        _ => Ok(()),
    }
}

/// Parse a model file, printing warnings to stderr; errors stop the command.
pub fn load_model(path: &Path) -> CliResult<ModelIR> {
    let format = ModelFormat::from_path(path)
        .ok_or_else(|| CliError::user(anyhow!("{}: expected a .json or .xml model", path.display())))?;
    let parsed = parse_model(&read(path)?, format)
        .with_context(|| format!("cannot parse {}", path.display()))
        .map_err(CliError::user)?;
    for d in &parsed.diagnostics {
        if d.severity != Severity::Error {
            eprintln!("{}: {d}", path.display());
        }
    }
    Ok(parsed.model)
}

fn load_requirements(path: Option<&Path>) -> CliResult<RequirementSet> {
    match path {
        Some(p) => RequirementSet::parse(&read(p)?)
            .with_context(|| format!("requirements {}", p.display()))
            .map_err(CliError::user),
        None => Ok(RequirementSet::default()),
    }
}

fn load_bench(path: Option<&Path>) -> CliResult<Vec<BenchModel>> {
    let Some(path) = path else { return Ok(fixtures::bench()) };
    let file = BenchFile::parse(&read(path)?).with_context(|| format!("bench {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    fixtures::load_bench_with(&file, |name| {
        fs::read_to_string(base.join(name)).map_err(|e| FixtureError::Format { name: name.into(), message: e.to_string() })
    })
    .map_err(CliError::user)
}

/// Run `cli`, returning the process exit code.
pub fn run(cli: Cli) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ENVIRONMENT;
        }
    };
    let jobs = cli.jobs;
    match pool.install(|| dispatch(cli.command, jobs)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            e.code
        }
    }
}

pub fn dispatch(command: Command, jobs: usize) -> CliResult<()> {
    match command {
        Command::Convert { input, output } => cmd_convert(&input, output.as_deref()),
        Command::Corpus { models, output, mask_rate, seed, placeholder } => {
            cmd_corpus(&models, &output, mask_rate, seed, &placeholder)
        }
        Command::Mask { model, block, key, window, include_names } => {
            cmd_mask(&model, block.as_deref(), key.as_deref(), window, include_names)
        }
        Command::Mutate { model, out_dir, approach, export_models, settings } => {
            cmd_mutate(&model, &out_dir, approach, export_models, &RunConfig::resolve(&settings, jobs)?)
        }
        Command::Simulate { model, test, requirements, output } => {
            cmd_simulate(&model, &test, requirements.as_deref(), output.as_deref())
        }
        Command::KillMatrix { model, mutants, suite, requirements, out_dir, tolerance } => cmd_kill_matrix(
            &model,
            &mutants,
            &suite,
            requirements.as_deref(),
            &out_dir,
            tolerance.unwrap_or(DEFAULT_TOLERANCE),
        ),
        Command::SelectTests { matrix, seed, repetition } => cmd_select_tests(&matrix, seed, repetition),
        Command::Experiment { out_dir, bench, models, settings } => {
            cmd_experiment(&out_dir, bench.as_deref(), &models, &RunConfig::resolve(&settings, jobs)?)
        }
        Command::Classify { mutants } => cmd_classify(&mutants),
    }
}

pub fn cmd_convert(input: &Path, output: Option<&Path>) -> CliResult<()> {
    let text = render_ir_file(&load_model(input)?);
    match output {
        Some(out) => write(out, &text),
        None => {
            emit(&text)
        }
    }
}

pub fn cmd_corpus(models: &[PathBuf], output: &Path, mask_rate: f64, seed: u64, placeholder: &str) -> CliResult<()> {
    let models = models.iter().map(|p| load_model(p)).collect::<CliResult<Vec<_>>>()?;
    let records = build_corpus(&models, mask_rate, seed, placeholder).map_err(CliError::user)?;
    write(output, &write_jsonl(&records))?;
    eprintln!("{} records, {} masks", records.len(), records.iter().map(|r| r.targets.len()).sum::<usize>());
    Ok(())
}

pub fn cmd_mask(model: &Path, block: Option<&str>, key: Option<&str>, window: usize, include_names: bool) -> CliResult<()> {
    let m = load_model(model)?;
    let sites = enumerate_sites(&m, include_names || (block.is_some() && key.is_none()));
    let Some(block) = block else {
        let listing: String =
            sites.iter().map(|s| format!("{}\t{}\t{}\n", s.block_id, s.target, s.original.token())).collect();
        return emit(&listing);
    };
    let target = key.map_or(SiteTarget::Name, SiteTarget::property);
    let site = sites
        .into_iter()
        .find(|s| s.block_id == block && s.target == target)
        .ok_or_else(|| CliError::user(anyhow!("no site {target} on block `{block}`")))?;
    let seq = mask(&m, &site, &MaskConfig { context_window: window, ..MaskConfig::default() }).map_err(CliError::user)?;
    emit(&format!("{}\n", seq.text))
}

fn mutant_file(approach: Approach) -> String {
    format!("mutants_{}.json", approach.tag())
}

pub fn cmd_mutate(model: &Path, out_dir: &Path, approach: ApproachArg, export: bool, cfg: &RunConfig) -> CliResult<()> {
    let m = load_model(model)?;
    write_json(&out_dir.join("config.json"), cfg)?;
    let mut sets = Vec::new();
    if approach != ApproachArg::Op {
        let bench: Vec<ModelIR> = fixtures::bench().into_iter().map(|b| b.model).collect();
        let predictor = cfg.predictor(&bench)?;
        match generate_mlm(&m, &predictor, &cfg.mlm()) {
            Ok(set) => sets.push(set),
            Err(e) => {
                // Keep what was generated before the predictor failed.
                write(&out_dir.join(mutant_file(Approach::Mlm)), &e.partial.to_json())?;
                return Err(e.into());
            }
        }
    }
    if approach != ApproachArg::Mlm {
        sets.push(generate_operators(&m));
    }
    for set in &sets {
        write(&out_dir.join(mutant_file(set.approach)), &set.to_json())?;
        if export {
            for (file, text) in set.export_models(&m).map_err(CliError::user)? {
                write(&out_dir.join("models").join(file), &text)?;
            }
        }
        eprintln!(
            "{}: {} mutants ({} candidates, {} identical, {} uncompilable, {} unclassified)",
            set.approach.tag(),
            set.mutants.len(),
            set.stats.generated,
            set.stats.discarded_identical,
            set.stats.discarded_uncompilable,
            set.unclassified()
        );
    }
    Ok(())
}

pub fn cmd_simulate(model: &Path, test: &Path, requirements: Option<&Path>, output: Option<&Path>) -> CliResult<()> {
    let m = load_model(model)?;
    let t: TestCase = serde_json::from_str(&read(test)?).with_context(|| format!("test case {}", test.display()))?;
    let reqs = load_requirements(requirements)?;
    reqs.check_signals(&m).map_err(CliError::user)?;
    let exec = execute(&m, &t, &reqs.probe_signals(&m)).map_err(CliError::user)?;
    if let Some(fault) = &exec.fault {
        eprintln!("run aborted: {fault}");
    }
    for r in &reqs.requirements {
        let verdict = check(r, &exec.trace).map_err(CliError::user)?;
        eprintln!("{}: {}", r.id, serde_json::to_string(&verdict).expect("verdict serializes"));
    }
    let csv = exec.trace.to_csv();
    match output {
        Some(out) => write(out, &csv),
        None => {
            emit(&csv)
        }
    }
}

pub fn cmd_kill_matrix(
    model: &Path,
    mutants: &Path,
    suite: &Path,
    requirements: Option<&Path>,
    out_dir: &Path,
    tolerance: f64,
) -> CliResult<()> {
    let m = load_model(model)?;
    let set = MutantSet::from_json(&read(mutants)?).with_context(|| format!("mutants {}", mutants.display()))?;
    let tests: Vec<TestCase> = serde_json::from_str(&read(suite)?).with_context(|| format!("suite {}", suite.display()))?;
    let reqs = load_requirements(requirements)?;
    write_json(
        &out_dir.join("config.json"),
        &serde_json::json!({ "model": model, "mutants": mutants, "suite": suite, "requirements": requirements, "tolerance": tolerance }),
    )?;
    let km = compute_kill_matrix(&m, &set.mutants, &tests, &reqs, tolerance)?;
    write_matrix(out_dir, set.approach.tag(), &km)?;
    for n in Notion::BOTH {
        eprintln!("{}: {}/{} killable", n.as_str(), km.killable_count(n), km.mutants.len());
    }
    Ok(())
}

fn write_matrix(dir: &Path, tag: &str, km: &KillMatrix) -> CliResult<()> {
    write_json(&dir.join(format!("matrix_{tag}.json")), km)?;
    for n in Notion::BOTH {
        write(&dir.join(format!("kills_{tag}_{}.csv", n.as_str())), &km.to_csv(n))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Selection {
    selected: Vec<String>,
    killed: usize,
    killable: usize,
    mutants: usize,
    score: Option<f64>,
}

/// Read a 0/1 kill-matrix CSV: `(test ids, mutant ids, cells)`.
pub fn read_matrix_csv(text: &str) -> anyhow::Result<(Vec<String>, Vec<String>, Vec<Vec<bool>>)> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.get(0) != Some("test") {
        bail!("first column must be `test`");
    }
    let mutants: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut tests = Vec::new();
    let mut cells = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        tests.push(row.get(0).unwrap_or_default().to_string());
        let bits = row
            .iter()
            .skip(1)
            .map(|c| match c.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(anyhow!("row {}: expected 0 or 1, got `{other}`", line + 2)),
            })
            .collect::<anyhow::Result<Vec<bool>>>()?;
        cells.push(bits);
    }
    Ok((tests, mutants, cells))
}

pub fn cmd_select_tests(matrix: &Path, seed: Option<u64>, repetition: usize) -> CliResult<()> {
    let (tests, mutants, cells) = read_matrix_csv(&read(matrix)?).with_context(|| matrix.display().to_string())?;
    let order = seed.map(|s| tie_order(tests.len(), s, repetition));
    let chosen = select_minimal_tests(&cells, order.as_deref());
    let killable = (0..mutants.len()).filter(|&m| cells.iter().any(|r| r[m])).count();
    let killed = (0..mutants.len()).filter(|&m| chosen.iter().any(|&t| cells[t][m])).count();
    let selection = Selection {
        selected: chosen.iter().map(|&t| tests[t].clone()).collect(),
        killed,
        killable,
        mutants: mutants.len(),
        score: mutation_score(killed, killable),
    };
    emit(&format!("{}\n", serde_json::to_string_pretty(&selection).expect("selection serializes")))
}

pub fn cmd_experiment(out_dir: &Path, bench: Option<&Path>, names: &[String], cfg: &RunConfig) -> CliResult<()> {
    let mut bench = load_bench(bench)?;
    let corpus: Vec<ModelIR> = bench.iter().map(|b| b.model.clone()).collect();
    if !names.is_empty() {
        if let Some(missing) = names.iter().find(|n| !bench.iter().any(|b| &b.model.name == *n)) {
            return Err(CliError::user(anyhow!("no bench model named `{missing}`")));
        }
        bench.retain(|b| names.contains(&b.model.name));
    }
    write_json(&out_dir.join("config.json"), cfg)?;
    let predictor = cfg.predictor(&corpus)?;
    let mut summary = String::new();
    for b in &bench {
        let dir = out_dir.join(&b.model.name);
        let ecfg = cfg.experiment(b.duration_steps);
        let out = run_experiment(&b.model, &b.requirements, &b.space, &predictor, &ecfg)?;
        write_json(&dir.join("config.json"), &ecfg)?;
        write(&dir.join(mutant_file(Approach::Mlm)), &out.mlm.to_json())?;
        write(&dir.join(mutant_file(Approach::Operators)), &out.operators.to_json())?;
        write_json(&dir.join("suite.json"), &out.suite)?;
        write_matrix(&dir, Approach::Mlm.tag(), &out.matrix_mlm)?;
        write_matrix(&dir, Approach::Operators.tag(), &out.matrix_operators)?;
        write(&dir.join("report.json"), &out.report.to_json())?;
        let table = out.report.to_text_table();
        write(&dir.join("report.txt"), &table)?;
        summary.push_str(&table);
        summary.push('\n');
    }
    write(&out_dir.join("summary.txt"), &summary)?;
    emit(&summary)
}

pub fn cmd_classify(mutants: &Path) -> CliResult<()> {
    let set = MutantSet::from_json(&read(mutants)?).with_context(|| format!("mutants {}", mutants.display()))?;
    let mut counts = std::collections::BTreeMap::new();
    let mut mismatched = 0;
    for m in &set.mutants {
        let p = classify(m);
        if p != m.pattern {
            mismatched += 1;
            eprintln!("{}: report says `{}`, classifies as `{}`", m.id, m.pattern, p);
        }
        *counts.entry(p).or_insert(0usize) += 1;
    }
    let mut table = String::new();
    for p in MutationPattern::ROWS.into_iter().chain([MutationPattern::Unclassified]) {
        table.push_str(&format!("{:>5}  {}\n", counts.get(&p).copied().unwrap_or(0), p));
    }
    table.push_str(&format!("{:>5}  total\n", set.mutants.len()));
    emit(&table)?;
    if mismatched > 0 {
        return Err(CliError::user(anyhow!("{mismatched} mutants disagree with their recorded pattern")));
    }
    Ok(())
}
