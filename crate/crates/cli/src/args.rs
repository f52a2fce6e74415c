//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ipr_rmt::ensembles::{EnsembleKind, Normalization};

use crate::settings::{PermKind, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "ipr-rmt",
    version,
    about = "Eigenvector localization in real random matrices: sampling, exact laws, comparisons"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample matrices and write one CSV row per retained eigenvalue.
    SampleSpectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Also write an SVG scatter coloured by the first requested IPR order.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Tabulate the density of the limiting IPR law.
    TheoryDensity {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        law: LawArgs,
        /// Evaluation grid `start:stop:points` (default: the support, 500 points).
        #[arg(long)]
        grid: Option<String>,
    },
    /// Tabulate the distribution function of the limiting IPR law.
    TheoryCdf {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        law: LawArgs,
        /// Evaluation grid `start:stop:points` (default: the support, 500 points).
        #[arg(long)]
        grid: Option<String>,
    },
    /// Draw exact samples of the limiting IPR law.
    TheorySample {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        law: LawArgs,
        /// Number of samples.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Exact mean IPR in the limit and, with --N, at finite dimension (JSON).
    TheoryMean {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        law: LawArgs,
        /// Matrix dimension for the finite-size mean.
        #[arg(long = "N")]
        n: Option<usize>,
    },
    /// Compare binned full-matrix IPRs near the real axis with the exact law (JSON).
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Bin centre in units of 1/√N.
        #[arg(long)]
        y: Option<f64>,
        /// Relative half-width of the bin.
        #[arg(long)]
        relwidth: Option<f64>,
        /// Largest |Re λ| kept.
        #[arg(long)]
        xwindow: Option<f64>,
        /// KS distance counted as agreement.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Mean and spread of synthetic eigenvector IPRs over growing dimensions (CSV).
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        law: LawArgs,
        /// Ascending dimensions, comma separated.
        #[arg(long = "N", value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        /// Samples per dimension.
        #[arg(long)]
        trials: Option<usize>,
        /// Fix the mixing amplitude s (requires --t) instead of sampling it.
        #[arg(long, requires = "t")]
        s: Option<f64>,
        /// Fix the mixing amplitude t (requires --s).
        #[arg(long, requires = "s")]
        t: Option<f64>,
    },
    /// Render an eigenvalue scatter coloured by IPR as SVG.
    Figure {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        run: RunArgs,
    },
}

/// Flags every subcommand understands.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON settings file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed (default: $IPR_RMT_SEED, else OS entropy).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EnsembleArg {
    Elliptic,
    GinibreReal,
    GinibreComplex,
    Induced,
    OrthogonalSum,
    PermutationSum,
}

impl From<EnsembleArg> for EnsembleKind {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::Elliptic => Self::EllipticReal,
            EnsembleArg::GinibreReal => Self::GinibreReal,
            EnsembleArg::GinibreComplex => Self::GinibreComplex,
            EnsembleArg::Induced => Self::InducedGinibre,
            EnsembleArg::OrthogonalSum => Self::OrthogonalSum,
            EnsembleArg::PermutationSum => Self::PermutationSum,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormalizationArg {
    None,
    Bulk,
    Empirical,
}

impl From<NormalizationArg> for Normalization {
    fn from(n: NormalizationArg) -> Self {
        match n {
            NormalizationArg::None => Self::None,
            NormalizationArg::Bulk => Self::Bulk,
            NormalizationArg::Empirical => Self::Empirical,
        }
    }
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// Random-matrix model (default: elliptic).
    #[arg(long, value_enum)]
    pub ensemble: Option<EnsembleArg>,
    /// Matrix dimension.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Non-symmetry of the elliptic model, in [0, 1].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Charge of the induced model.
    #[arg(long)]
    pub nu: Option<usize>,
    /// Number of summands of the sum models.
    #[arg(long)]
    pub d: Option<usize>,
    /// Permutation law of the permutation-sum model.
    #[arg(long, value_enum)]
    pub perm: Option<PermKind>,
    /// Ewens parameter.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Spectrum rescaling.
    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Number of sampled matrices.
    #[arg(long)]
    pub trials: Option<usize>,
    /// IPR orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<u32>>,
    /// Worker threads (default: available parallelism); never changes the output.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LawArgs {
    /// IPR order.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<u32>>,
    /// Height of the eigenvalue above the real axis, in units of 1/√N.
    #[arg(long)]
    pub y: Option<f64>,
    /// Non-symmetry parameter in [0, 1).
    #[arg(long)]
    pub tau: Option<f64>,
}

impl CommonArgs {
    fn settings(&self) -> Settings {
        Settings { out: self.out.clone(), seed: self.seed, ..Default::default() }
    }
}

impl EnsembleArgs {
    fn apply(&self, s: &mut Settings) {
        s.ensemble = self.ensemble.map(Into::into);
        s.n = self.n;
        s.tau = self.tau;
        s.nu = self.nu;
        s.d = self.d;
        s.perm = self.perm;
        s.theta = self.theta;
        s.normalization = self.normalization.map(Into::into);
    }
}

impl RunArgs {
    fn apply(&self, s: &mut Settings) {
        s.trials = self.trials;
        s.q = self.q.clone();
        s.workers = self.workers;
    }
}

impl LawArgs {
    fn apply(&self, s: &mut Settings) {
        s.q = self.q.clone();
        s.y = self.y;
        s.tau = self.tau;
    }
}

impl Command {
    pub fn config_path(&self) -> Option<&PathBuf> {
        self.common().config.as_ref()
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::SampleSpectrum { common, .. }
            | Command::TheoryDensity { common, .. }
            | Command::TheoryCdf { common, .. }
            | Command::TheorySample { common, .. }
            | Command::TheoryMean { common, .. }
            | Command::Compare { common, .. }
            | Command::Convergence { common, .. }
            | Command::Figure { common, .. } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::SampleSpectrum { .. } => "sample-spectrum",
            Command::TheoryDensity { .. } => "theory-density",
            Command::TheoryCdf { .. } => "theory-cdf",
            Command::TheorySample { .. } => "theory-sample",
            Command::TheoryMean { .. } => "theory-mean",
            Command::Compare { .. } => "compare",
            Command::Convergence { .. } => "convergence",
            Command::Figure { .. } => "figure",
        }
    }

    /// The settings given on the command line (only the flags actually passed).
    pub fn flag_settings(&self) -> Settings {
        let mut s = self.common().settings();
        match self {
            Command::SampleSpectrum { ensemble, run, svg, .. } => {
                ensemble.apply(&mut s);
                run.apply(&mut s);
                s.svg = svg.clone();
            }
            Command::TheoryDensity { law, grid, .. } | Command::TheoryCdf { law, grid, .. } => {
                law.apply(&mut s);
                s.grid = grid.clone();
            }
            Command::TheorySample { law, count, .. } => {
                law.apply(&mut s);
                s.count = *count;
            }
            Command::TheoryMean { law, n, .. } => {
                law.apply(&mut s);
                s.n = *n;
            }
            Command::Compare { ensemble, run, y, relwidth, xwindow, threshold, .. } => {
                ensemble.apply(&mut s);
                run.apply(&mut s);
                s.y = *y;
                s.relwidth = *relwidth;
                s.xwindow = *xwindow;
                s.threshold = *threshold;
            }
            Command::Convergence { law, n_list, trials, s: amp_s, t: amp_t, .. } => {
                law.apply(&mut s);
                s.n_list = n_list.clone();
                s.trials = *trials;
                s.s = *amp_s;
                s.t = *amp_t;
            }
            Command::Figure { ensemble, run, .. } => {
                ensemble.apply(&mut s);
                run.apply(&mut s);
            }
        }
        s
    }
}
