mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fracflight::flights::{ndim_solution, FlightLaw};
use fracflight::fracpoisson::FracPoissonLaw;
use fracflight::mcbride::{ek_integral, ek_monomial, op_monomial, HyperBesselOp};
use fracflight::pdecheck::{run_case, CaseReport, CASES, DEFAULT_TERMS, SWEEP_ALPHAS};
use fracflight::planar::{Mixing, PlanarLaw, ThinnedMotionSpec};
use fracflight::sampling::sample_parallel;
use fracflight::specfun::{
    bessel_i0, bessel_i1, bessel_j0, gamma, gen_beta_ml, hyper_bessel, mittag_leffler, multi_index_ml, rgamma,
    MLParams, MultiIndexML,
};
use fracflight::telegraph::{classify_shape_with_tolerance, conditional_exponent, Parity, TelegraphLaw};
use fracflight::Error;

use output::{midpoints, Cell, Table, VERSION};

#[derive(Parser)]
#[command(name = "fracflight", version = VERSION, about = "Fractional hyper-Bessel calculus, fractional telegraph and planar motions, random flights")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize, Clone)]
struct Common {
    /// Master seed for every sampler.
    #[arg(long, global = true, env = "FRACFLIGHT_SEED", default_value_t = 20240101)]
    seed: u64,
    /// Sampling threads; the output does not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Special functions.
    #[command(subcommand)]
    Specfun(SpecfunCmd),
    /// Fractional powers of hyper-Bessel operators on monomials.
    #[command(subcommand)]
    Mcbride(McbrideCmd),
    /// Fractional Poisson counting law P{N=k} = (λt^α)^k / (Γ(αk+1) E_{α,1}(λt^α)).
    #[command(subcommand)]
    Fpp(FppCmd),
    /// Fractional telegraph-type motion on [-ct, ct].
    #[command(subcommand)]
    Telegraph(TelegraphCmd),
    /// Fractional planar motion in the disc of radius ct.
    #[command(subcommand)]
    Planar(PlanarCmd),
    /// Random flights in R^N.
    #[command(subcommand)]
    Flight(FlightCmd),
    /// Certify series solutions against their fractional equations.
    #[command(
        long_about = "Certify series solutions against their fractional equations.\n\n\
        Each case checks L^α u = μ u + f term by term, where L^α w^β = m^{nα} Π_k Γ(b_k+β/m+1)/Γ(b_k+β/m+1-α) w^{β-mα}.\n\
        Cases: kg1d, kg1d-iterate, kg1d-minus ((∂²_t - c²∂²_x)^α u = ±λ² u), shifted-g, time-derivative-f, odd-h,\n\
        planar-even, planar-odd, planar-full, projection (forced equations), ndim-N ((∂²_t - c²Δ)^α in R^N),\n\
        hyper-n ((w^{-n}(w d/dw)^n)^α), third-order, cyclic (three-direction planar motion), epd\n\
        ((d²/dt² + (1/t) d/dt)^α f = |k|² f), factorized-rl (4^α ∂^α_{z1} ∂^α_{z2} on (z1 z2)^p)."
    )]
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum SpecfunCmd {
    /// Evaluate a special function on a list of arguments.
    #[command(long_about = "Evaluate a special function.\n\n\
        gamma, rgamma: Γ(x), 1/Γ(x)\n\
        ml: E_{α,β}(x) = Σ x^k / Γ(αk+β)\n\
        gen-ml: Σ x^k / Γ(νk+γ)^p\n\
        multi-ml: Σ x^k / Π_j Γ(ρ_j k + μ_j)\n\
        hyper-bessel: I_{0,n}(x) = Σ (x/n)^{nk} / (k!)^n\n\
        i0, i1, j0: Bessel functions")]
    Eval(SpecfunArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Function {
    Gamma,
    Rgamma,
    Ml,
    GenMl,
    MultiMl,
    HyperBessel,
    I0,
    I1,
    J0,
}

#[derive(Args, Serialize)]
struct SpecfunArgs {
    #[arg(long = "fn", value_enum)]
    function: Function,
    /// Arguments, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    x: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Power p of the generalized function.
    #[arg(long, default_value_t = 2.0)]
    power: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma_shift: f64,
    #[arg(long, value_delimiter = ',')]
    rhos: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mus: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    order: u32,
}

#[derive(Subcommand)]
enum McbrideCmd {
    /// L^α w^β = m^{nα} Π_k Γ(b_k+β/m+1)/Γ(b_k+β/m+1-α) · w^{β-mα}.
    Monomial(MonomialArgs),
    /// I_m^{η,α} x^β = Γ(η+β/m+1)/Γ(η+β/m+1+α) · x^β, closed form and quadrature.
    Ek(EkArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum OpKind {
    /// d²/dw² + (1/w) d/dw
    #[value(name = "bessel-1d")]
    #[serde(rename = "bessel-1d")]
    Bessel1d,
    /// d²/dw² + (2/w) d/dw
    #[value(name = "bessel-2d")]
    #[serde(rename = "bessel-2d")]
    Bessel2d,
    /// d²/dw² + (N/w) d/dw with --dim N
    #[serde(rename = "ndim")]
    Ndim,
    /// w^{-n}(w d/dw)^n with --order n
    #[serde(rename = "hyper")]
    Hyper,
    /// w^{-2} d/dw w d/dw w d/dw
    #[serde(rename = "third-order")]
    ThirdOrder,
    /// d²/dt² + (χ/t) d/dt with --chi
    #[serde(rename = "epd")]
    Epd,
}

#[derive(Args, Serialize)]
struct MonomialArgs {
    #[arg(long, value_enum)]
    op: OpKind,
    #[arg(long)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 3)]
    dim: u32,
    #[arg(long, default_value_t = 3)]
    order: u32,
    #[arg(long, default_value_t = 1.0)]
    chi: f64,
}

#[derive(Args, Serialize)]
struct EkArgs {
    #[arg(long)]
    m: f64,
    #[arg(long, allow_hyphen_values = true)]
    eta: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long)]
    x: f64,
}

#[derive(Subcommand)]
enum FppCmd {
    /// P{N=k} = (λt^α)^k / (Γ(αk+1) E_{α,1}(λt^α)) for k = 0..=kmax.
    Pmf(FppArgs),
    /// Exact draws of N by table inversion.
    Sample(FppSampleArgs),
}

#[derive(Args, Serialize)]
struct FppArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 20)]
    kmax: u64,
}

#[derive(Args, Serialize)]
struct FppSampleArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    t: f64,
    /// Number of draws.
    #[arg(long, short)]
    n: usize,
}

#[derive(Subcommand)]
enum TelegraphCmd {
    /// Absolutely continuous density
    /// p(x,t) = [ct Σ_{k≥1} q^{2k} w^{2αk-2}/(Γ(αk)Γ(αk+1)) + Σ_{k≥0} q^{2k+1} w^{2αk+α-1}/Γ(αk+(1+α)/2)²] / E_{α,1}(λt^α),
    /// q = λ/(2c)^α, w = √(c²t²-x²); atoms 1/(2E_{α,1}(λt^α)) at ±ct.
    Density(TelegraphDensityArgs),
    /// Exact draws: N from the counting law, then ct(2W-1) with W ~ Beta(αk, αk) (N=2k)
    /// or Beta(αk+(1+α)/2, αk+(1+α)/2) (N=2k+1).
    Sample(MotionSampleArgs),
    /// Shape of the conditional density ∝ (c²t²-x²)^e, with e = αk-1 (2k changes)
    /// or αk+(α-1)/2 (2k+1 changes): arcsine if e<0, uniform if e=0, bell if e>0.
    Shape(ShapeArgs),
}

#[derive(Args, Serialize)]
struct TelegraphDensityArgs {
    /// One value or a comma-separated sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5, 0.7, 0.9, 1.0])]
    alpha: Vec<f64>,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    t: f64,
    /// Number of x points in (-ct, ct).
    #[arg(long, default_value_t = 401)]
    grid: usize,
    /// Report log10 of the density.
    #[arg(long)]
    log_scale: bool,
}

#[derive(Args, Serialize)]
struct MotionSampleArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, short)]
    n: usize,
}

#[derive(Args, Serialize)]
struct ShapeArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    k: u64,
    #[arg(long, value_enum)]
    parity: ParityArg,
    /// Exponents within this distance of 0 count as uniform.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ParityArg {
    Even,
    Odd,
}

#[derive(Subcommand)]
enum PlanarCmd {
    /// Radial profile of the density
    /// p(ρ) = Σ_{n≥1} (λt^α)^n/Γ(αn+1) · αn/(2π(ct)^{αn}) w^{αn-2} / E_{α,1}(λt^α), w = √(c²t²-ρ²);
    /// mass 1/E_{α,1}(λt^α) on the circle.
    Density(PlanarGridArgs),
    /// Exact draws of (X, Y).
    Sample(MotionSampleArgs),
    /// Binomially thinned motion: conditional mean nα/(2πw)(ct)^{-n}(ct+α(w-ct))^{n-1},
    /// or the density after mixing n over Poisson(λt) or (λt)^n/(Γ(αn+1)E_{α,1}(λt)).
    Thinned(ThinnedArgs),
    /// Projection on the x axis:
    /// Σ_{k≥0} (λ/(2c)^α)^k w^{αk-1}/Γ((αk+1)/2)² / E_{α,1}(λt^α), w = √(c²t²-x²).
    Project(PlanarGridArgs),
}

#[derive(Args, Serialize)]
struct PlanarGridArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 201)]
    grid: usize,
    #[arg(long)]
    log_scale: bool,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MixingArg {
    Fractional,
    Homogeneous,
}

#[derive(Args, Serialize)]
struct ThinnedArgs {
    /// Retention probability of each change.
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    t: f64,
    /// Fixed number of changes; omit to mix over --lambda.
    #[arg(long, short)]
    n: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = MixingArg::Homogeneous)]
    mixing: MixingArg,
    #[arg(long, default_value_t = 201)]
    grid: usize,
}

#[derive(Subcommand)]
enum FlightCmd {
    /// Radial profile after k events in R^N:
    /// Γ((kα+N)/2) w^{kα-2} / ((ct)^{kα+N-2} Γ(kα/2) π^{N/2}), w = √(c²t²-ρ²), α ∈ (0, 1];
    /// with --solution, the series Σ_k (λ/(2c)^α)^{2k} w^{2αk+2α-2} / (Γ(αk+α+(N-1)/2)Γ(αk+α)).
    Ndim(NdimArgs),
    /// Radial profile of the 4D flight, α ∈ (1, 2]:
    /// λ/(π²c^{2+α}t^{2+α/2}) w^{α-2} [E_{α/2,α/2-1}(ζ) + 2E_{α/2,α/2}(ζ)] / E_{α/2,1}(λt^{α/2}),
    /// ζ = λw^α/(c^α t^{α/2}); atom 1/E_{α/2,1}(λt^{α/2}) on the sphere.
    #[command(name = "4d")]
    FourD(FourDArgs),
}

#[derive(Args, Serialize)]
struct NdimArgs {
    #[arg(long)]
    dim: u32,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 1)]
    k: u64,
    /// Tabulate the Klein-Gordon series solution instead of the law.
    #[arg(long)]
    solution: bool,
    #[arg(long, default_value_t = 201)]
    grid: usize,
}

#[derive(Args, Serialize)]
struct FourDArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 201)]
    grid: usize,
    /// Draw this many radii instead of tabulating the density.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    log_scale: bool,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// A case name or `all`.
    case: String,
    /// Orders to check; defaults to 0.3,0.5,0.7,1.0.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TERMS)]
    terms: usize,
    /// Largest accepted residual.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Full JSON report with per-term ledgers.
    #[arg(long)]
    json: bool,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Domain(_) | Error::Pole(_) | Error::Precondition { .. } => {
                Failure::Usage(e.to_string())
            }
            Error::NonConvergence { .. } | Error::Overflow(_) | Error::Quadrature { .. } => Failure::Numerical(e.to_string()),
        }
    }
}

type Out = Result<String, Failure>;

fn finish(table: Table, format: Format) -> Out {
    Ok(match format {
        Format::Csv => table.render(),
        Format::Json => table.render_json(),
    })
}

fn scale(v: f64, log: bool) -> f64 {
    if log { v.log10() } else { v }
}

fn specfun(a: &SpecfunArgs, common: &Common) -> Out {
    let mut t = Table::new("specfun eval", a, common.seed);
    t.columns(&["x", "value"]);
    for &x in &a.x {
        let v = match a.function {
            Function::Gamma => gamma(x)?,
            Function::Rgamma => rgamma(x),
            Function::Ml => mittag_leffler(a.alpha, a.beta, x)?,
            Function::GenMl => gen_beta_ml(&MLParams::new(a.power, a.nu, a.gamma_shift)?, x)?,
            Function::MultiMl => multi_index_ml(&MultiIndexML::new(a.rhos.clone(), a.mus.clone())?, x)?,
            Function::HyperBessel => hyper_bessel(a.order, x)?,
            Function::I0 => bessel_i0(x)?,
            Function::I1 => bessel_i1(x)?,
            Function::J0 => bessel_j0(x)?,
        };
        t.row(&[x, v]);
    }
    finish(t, common.format)
}

fn operator(a: &MonomialArgs) -> Result<HyperBesselOp, Error> {
    Ok(match a.op {
        OpKind::Bessel1d => HyperBesselOp::bessel_1d(),
        OpKind::Bessel2d => HyperBesselOp::bessel_2d(),
        OpKind::Ndim => HyperBesselOp::ndim(a.dim),
        OpKind::Hyper => HyperBesselOp::hyper(a.order)?,
        OpKind::ThirdOrder => HyperBesselOp::third_order(),
        OpKind::Epd => HyperBesselOp::epd(a.chi)?,
    })
}

fn mcbride(cmd: &McbrideCmd, common: &Common) -> Out {
    match cmd {
        McbrideCmd::Monomial(a) => {
            let op = operator(a)?;
            let act = op_monomial(&op, a.alpha, a.beta)?;
            let mut t = Table::new("mcbride monomial", a, common.seed);
            t.meta("m", output::num(op.m()));
            t.meta("b", op.b().iter().map(|v| output::num(*v)).collect::<Vec<_>>().join(";"));
            t.columns(&["beta", "coefficient", "exponent"]);
            t.row(&[a.beta, act.coefficient, act.exponent]);
            finish(t, common.format)
        }
        McbrideCmd::Ek(a) => {
            let closed = ek_monomial(a.m, a.eta, a.alpha, a.beta)? * a.x.powf(a.beta);
            let quad = ek_integral(a.m, a.eta, a.alpha, |u| u.powf(a.beta), a.x)?;
            let mut t = Table::new("mcbride ek", a, common.seed);
            t.columns(&["x", "closed_form", "quadrature"]);
            t.row(&[a.x, closed, quad]);
            finish(t, common.format)
        }
    }
}

fn fpp(cmd: &FppCmd, common: &Common) -> Out {
    match cmd {
        FppCmd::Pmf(a) => {
            let law = FracPoissonLaw::new(a.alpha, a.lambda, a.t)?;
            let mut t = Table::new("fpp pmf", a, common.seed);
            t.meta("normalizer", output::num(law.normalizer()));
            t.columns(&["k", "pmf"]);
            for k in 0..=a.kmax {
                t.row(&[k as f64, law.pmf(k)]);
            }
            finish(t, common.format)
        }
        FppCmd::Sample(a) => {
            let law = FracPoissonLaw::new(a.alpha, a.lambda, a.t)?;
            let draws = sample_parallel(a.n, common.seed, common.workers, |rng| law.sample(rng))?;
            let mut t = Table::new("fpp sample", a, common.seed);
            t.columns(&["k"]);
            for k in draws {
                t.cells(vec![Cell::Text(k.to_string())]);
            }
            finish(t, common.format)
        }
    }
}

fn telegraph(cmd: &TelegraphCmd, common: &Common) -> Out {
    match cmd {
        TelegraphCmd::Density(a) => {
            let mut t = Table::new("telegraph density", a, common.seed);
            let laws = a
                .alpha
                .iter()
                .map(|&al| TelegraphLaw::new(al, a.lambda, a.c, a.t))
                .collect::<Result<Vec<_>, _>>()?;
            t.meta(
                "singular_weight",
                laws.iter().map(|l| output::num(l.singular_weight())).collect::<Vec<_>>().join(";"),
            );
            let name = if a.log_scale { "log10_ac_density" } else { "ac_density" };
            if laws.len() == 1 {
                t.columns(&["x", name]);
            } else {
                t.columns(&["alpha", "x", name]);
            }
            let ct = a.c * a.t;
            for law in &laws {
                for x in midpoints(-ct, ct, a.grid) {
                    let d = scale(law.density(x)?.0, a.log_scale);
                    if laws.len() == 1 { t.row(&[x, d]) } else { t.row(&[law.alpha(), x, d]) }
                }
            }
            finish(t, common.format)
        }
        TelegraphCmd::Sample(a) => {
            let law = TelegraphLaw::new(a.alpha, a.lambda, a.c, a.t)?;
            let xs = sample_parallel(a.n, common.seed, common.workers, |rng| law.sample_position(rng))?;
            let mut t = Table::new("telegraph sample", a, common.seed);
            t.columns(&["x"]);
            for x in xs {
                t.row(&[x]);
            }
            finish(t, common.format)
        }
        TelegraphCmd::Shape(a) => {
            let parity = match a.parity {
                ParityArg::Even => Parity::Even,
                ParityArg::Odd => Parity::Odd,
            };
            let shape = classify_shape_with_tolerance(a.alpha, a.k, parity, a.tol)?;
            match common.format {
                Format::Csv => Ok(format!("{shape}\n")),
                Format::Json => {
                    let mut t = Table::new("telegraph shape", a, common.seed);
                    t.columns(&["exponent", "shape"]);
                    t.cells(vec![Cell::Num(conditional_exponent(a.alpha, a.k, parity)), Cell::Text(shape.to_string())]);
                    Ok(t.render_json())
                }
            }
        }
    }
}

fn planar(cmd: &PlanarCmd, common: &Common) -> Out {
    match cmd {
        PlanarCmd::Density(a) => {
            let law = PlanarLaw::new(a.alpha, a.lambda, a.c, a.t)?;
            let mut t = Table::new("planar density", a, common.seed);
            t.meta("boundary_mass", output::num(law.boundary_mass()));
            t.columns(&["rho", if a.log_scale { "log10_density" } else { "density" }]);
            for r in midpoints(0.0, law.reach(), a.grid) {
                t.row(&[r, scale(law.density_2d(r, 0.0)?.0, a.log_scale)]);
            }
            finish(t, common.format)
        }
        PlanarCmd::Sample(a) => {
            let law = PlanarLaw::new(a.alpha, a.lambda, a.c, a.t)?;
            let pts = sample_parallel(a.n, common.seed, common.workers, |rng| law.sample_2d(rng))?;
            let mut t = Table::new("planar sample", a, common.seed);
            t.columns(&["x", "y"]);
            for (x, y) in pts {
                t.row(&[x, y]);
            }
            finish(t, common.format)
        }
        PlanarCmd::Thinned(a) => {
            let mixing = match a.mixing {
                MixingArg::Fractional => Mixing::Fractional,
                MixingArg::Homogeneous => Mixing::Homogeneous,
            };
            let spec = ThinnedMotionSpec::new(a.n.unwrap_or(1), a.alpha, a.c, a.t, mixing)?;
            let mut t = Table::new("planar thinned", a, common.seed);
            t.columns(&["rho", "density"]);
            match (a.n, a.lambda) {
                (Some(_), None) => {
                    for r in midpoints(0.0, spec.reach(), a.grid) {
                        t.row(&[r, spec.conditional_mean_density(r, 0.0)?]);
                    }
                }
                (None, Some(lambda)) => {
                    t.meta("boundary_mass", output::num(spec.boundary_mass(lambda)?));
                    for r in midpoints(0.0, spec.reach(), a.grid) {
                        t.row(&[r, spec.unconditional_density(lambda, r, 0.0)?]);
                    }
                }
                _ => return Err(Failure::Usage("give exactly one of --n and --lambda".into())),
            }
            finish(t, common.format)
        }
        PlanarCmd::Project(a) => {
            let law = PlanarLaw::new(a.alpha, a.lambda, a.c, a.t)?;
            let mut t = Table::new("planar project", a, common.seed);
            t.columns(&["x", if a.log_scale { "log10_density" } else { "density" }]);
            let ct = law.reach();
            for x in midpoints(-ct, ct, a.grid) {
                t.row(&[x, scale(law.projection_density(x)?, a.log_scale)]);
            }
            finish(t, common.format)
        }
    }
}

fn flight(cmd: &FlightCmd, common: &Common) -> Out {
    match cmd {
        FlightCmd::Ndim(a) => {
            let law = FlightLaw::ndim(a.dim, a.alpha, a.lambda, a.c, a.t)?;
            let mut t = Table::new("flight ndim", a, common.seed);
            let ct = law.reach();
            if a.solution {
                t.columns(&["w", "solution"]);
                for w in midpoints(0.0, ct, a.grid) {
                    t.row(&[w, ndim_solution(a.dim, a.alpha, a.lambda, a.c, w)?]);
                }
            } else {
                t.meta("conditional_mass", output::num(law.conditional_mass(a.k)?));
                t.columns(&["rho", "density"]);
                let mut x = vec![0.0; a.dim as usize];
                for r in midpoints(0.0, ct, a.grid) {
                    x[0] = r;
                    t.row(&[r, law.conditional_density(a.k, &x)?]);
                }
            }
            finish(t, common.format)
        }
        FlightCmd::FourD(a) => {
            let law = FlightLaw::four_d(a.alpha, a.lambda, a.c, a.t)?;
            let mut t = Table::new("flight 4d", a, common.seed);
            t.meta("boundary_mass", output::num(law.boundary_mass()?));
            if let Some(n) = a.sample {
                let draws = sample_parallel(n, common.seed, common.workers, |rng| law.sample_4d(rng))?;
                t.columns(&["x1", "x2", "x3", "x4"]);
                for d in draws {
                    t.row(&d?);
                }
            } else {
                t.columns(&["rho", if a.log_scale { "log10_density" } else { "density" }]);
                for r in midpoints(0.0, law.reach(), a.grid) {
                    t.row(&[r, scale(law.flight4d_density(&[r, 0.0, 0.0, 0.0])?, a.log_scale)]);
                }
            }
            finish(t, common.format)
        }
    }
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    version: &'a str,
    params: &'a VerifyArgs,
    passed: bool,
    max_residual: f64,
    cases: Vec<CaseReport>,
}

fn verify(a: &VerifyArgs, common: &Common) -> Out {
    let names: Vec<&str> = if a.case == "all" {
        CASES.to_vec()
    } else if let Some(n) = CASES.iter().find(|n| **n == a.case) {
        vec![*n]
    } else {
        return Err(Failure::Usage(format!("unknown case '{}'; known: all, {}", a.case, CASES.join(", "))));
    };
    let alphas = if a.alpha.is_empty() { SWEEP_ALPHAS.to_vec() } else { a.alpha.clone() };
    let mut reports = Vec::new();
    for name in names {
        for &al in &alphas {
            let mut r = run_case(name, al, a.terms)?;
            r.passed = r.report.precondition_failures.is_empty() && r.max_residual <= a.tol && r.max_pointwise_residual <= a.tol;
            reports.push(r);
        }
    }
    let passed = reports.iter().all(|r| r.passed);
    let max_residual = reports.iter().map(|r| r.max_residual.max(r.max_pointwise_residual)).fold(0.0, f64::max);
    let text = if a.json || matches!(common.format, Format::Json) {
        let doc = VerifyDoc { version: VERSION, params: a, passed, max_residual, cases: reports };
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Numerical(e.to_string()))?;
        s.push('\n');
        s
    } else {
        let mut t = Table::new("verify", a, common.seed);
        t.meta("passed", passed);
        t.columns(&["case", "alpha", "max_residual", "max_pointwise_residual", "truncated_terms", "passed"]);
        for r in &reports {
            t.cells(vec![
                Cell::Text(r.case.clone()),
                Cell::Num(r.alpha),
                Cell::Num(r.max_residual),
                Cell::Num(r.max_pointwise_residual),
                Cell::Text(r.report.truncated.len().to_string()),
                Cell::Text(r.passed.to_string()),
            ]);
        }
        t.render()
    };
    if passed {
        Ok(text)
    } else {
        // the report is still useful when the check fails
        emit(&text, common.output.as_deref()).map_err(Failure::Usage)?;
        Err(Failure::Numerical(format!("residual above {:e}", a.tol)))
    }
}

fn emit(text: &str, path: Option<&std::path::Path>) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| format!("cannot write output: {e}"))
        }
    }
}

fn run(cli: &Cli) -> Out {
    let c = &cli.common;
    if c.workers == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    match &cli.command {
        Command::Specfun(SpecfunCmd::Eval(a)) => specfun(a, c),
        Command::Mcbride(cmd) => mcbride(cmd, c),
        Command::Fpp(cmd) => fpp(cmd, c),
        Command::Telegraph(cmd) => telegraph(cmd, c),
        Command::Planar(cmd) => planar(cmd, c),
        Command::Flight(cmd) => flight(cmd, c),
        Command::Verify(a) => verify(a, c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => match emit(&text, cli.common.output.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
