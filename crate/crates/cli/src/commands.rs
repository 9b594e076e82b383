//! Subcommand implementations: each validates up front, computes through
//! the library, and returns a rendered table plus a stdout summary.

use repgas::contraction::{certify_neighborhood, segment_distance};
use repgas::mc::poisson_gof;
use repgas::observables::{thermo_point, Engine, ObservableParams};
use repgas::oracle::{
    density_oracle, mean_density, partition_polynomial, partition_series, partition_zeros,
};
use repgas::recursion::density_with;

use crate::config::RunConfig;
use crate::output::{fmt_f, Cell, Table};

/// Engine or I/O failure after a valid config; maps to exit code 1.
pub struct RuntimeError(pub String);

impl From<repgas::Error> for RuntimeError {
    fn from(e: repgas::Error) -> Self {
        RuntimeError(e.to_string())
    }
}

type RResult<T> = Result<T, RuntimeError>;

/// What a subcommand produced: summary lines for stdout and an optional
/// table destined for the configured output.
pub struct CommandOutput {
    pub summary: String,
    pub table: Option<Table>,
    /// Non-tabular payload (the certificate text) written verbatim.
    pub text: Option<String>,
}

fn observable_params(cfg: &RunConfig) -> ObservableParams {
    let mut params = ObservableParams::for_dimension(cfg.region.dimension());
    params.depth = cfg.depth;
    params.recursion = cfg.recursion.clone();
    params.truncation = cfg.truncation;
    params.samples_per_order = cfg.samples;
    params.hat_center = cfg.hat_center.clone();
    params
}

pub fn cmd_cphi(cfg: &RunConfig) -> RResult<CommandOutput> {
    let c = cfg.potential.temperedness_constant()?;
    let critical = cfg.potential.critical_activity()?;
    Ok(CommandOutput {
        summary: format!("c_phi = {}\ncritical_activity = {}\n", fmt_f(c), fmt_f(critical)),
        table: None,
        text: None,
    })
}

pub fn cmd_certify(cfg: &RunConfig, lambda0: Option<f64>, grid: usize) -> RResult<CommandOutput> {
    let c_phi = cfg.potential.temperedness_constant()?;
    let lambda0 = lambda0.unwrap_or(cfg.lambda.re);
    let cert = certify_neighborhood(lambda0, c_phi, grid);
    let text = format!(
        "lambda0 = {}\nc_phi = {}\ndelta = {}\neps1 = {}\neps2 = {}\neps3 = {}\n\
         grid_resolution = {}\nmax_abs_gprime_on_grid = {}\npassed = {}\n",
        fmt_f(cert.lambda0),
        fmt_f(cert.c_phi),
        fmt_f(cert.delta),
        fmt_f(cert.eps1),
        fmt_f(cert.eps2),
        fmt_f(cert.eps3),
        cert.grid_resolution,
        fmt_f(cert.max_abs_gprime_on_grid),
        cert.passed,
    );
    Ok(CommandOutput {
        summary: text.clone(),
        table: None,
        text: Some(text),
    })
}

pub fn cmd_density(cfg: &RunConfig, depth: Option<usize>) -> RResult<CommandOutput> {
    let depth = depth.unwrap_or(cfg.depth);
    let report = density_with(&cfg.activity, &cfg.v, depth, &cfg.recursion)?;
    let mut table = Table::new(vec!["depth", "rho_re", "rho_im", "last_step_delta"]);
    for (j, value) in report.profile.iter().enumerate() {
        let delta = if j == 0 {
            value.norm()
        } else {
            (value - report.profile[j - 1]).norm()
        };
        table.push(vec![
            Cell::U(j as u64),
            Cell::F(value.re),
            Cell::F(value.im),
            Cell::F(delta),
        ]);
    }
    let est = &report.estimate;
    let summary = format!(
        "rho({}) = {} + {} i  (depth {}, last_step_delta {}, nodes {})\n",
        cfg.v.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(" "),
        fmt_f(est.value.re),
        fmt_f(est.value.im),
        est.depth,
        fmt_f(est.last_step_delta),
        report.nodes,
    );
    Ok(CommandOutput {
        summary,
        table: Some(table),
        text: None,
    })
}

pub fn cmd_pressure(cfg: &RunConfig) -> RResult<CommandOutput> {
    let params = observable_params(cfg);
    let mut table = Table::new(vec![
        "lambda",
        "pressure",
        "density",
        "packing_density",
        "engine",
        "depth",
        "K",
    ]);
    let mut summary = String::new();
    for engine in [Engine::Recursion, Engine::Oracle] {
        let point = thermo_point(&cfg.activity, &cfg.region, engine, &params)?;
        summary.push_str(&format!(
            "{engine}: pressure = {}, density = {}\n",
            fmt_f(point.pressure),
            fmt_f(point.density)
        ));
        table.push(vec![
            Cell::F(point.lambda),
            Cell::F(point.pressure),
            Cell::F(point.density),
            match point.packing_density {
                Some(p) => Cell::F(p),
                None => Cell::Empty,
            },
            Cell::S(engine.to_string()),
            match engine {
                Engine::Recursion => Cell::U(params.depth as u64),
                Engine::Oracle => Cell::Empty,
            },
            match engine {
                Engine::Recursion => Cell::Empty,
                Engine::Oracle => Cell::U(params.truncation as u64),
            },
        ]);
    }
    Ok(CommandOutput {
        summary,
        table: Some(table),
        text: None,
    })
}

pub fn cmd_zeros(cfg: &RunConfig) -> RResult<CommandOutput> {
    let poly = partition_polynomial(&cfg.activity, &cfg.region, cfg.truncation, cfg.samples)?;
    let zeros = partition_zeros(&poly);
    let critical = cfg.potential.critical_activity()?;
    let mut table = Table::new(vec!["index", "re", "im", "distance_to_segment"]);
    let mut min_dist = f64::INFINITY;
    for (i, z) in zeros.iter().enumerate() {
        let dist = segment_distance(*z, critical);
        min_dist = min_dist.min(dist);
        table.push(vec![
            Cell::U(i as u64),
            Cell::F(z.re),
            Cell::F(z.im),
            Cell::F(dist),
        ]);
    }
    let mut summary = poly.text_block();
    summary.push_str(&format!(
        "zeros = {}\nmin_distance_to_subcritical_segment = {}\n",
        zeros.len(),
        if zeros.is_empty() {
            "inf".to_string()
        } else {
            fmt_f(min_dist)
        }
    ));
    Ok(CommandOutput {
        summary,
        table: Some(table),
        text: None,
    })
}

pub fn cmd_oracle(cfg: &RunConfig) -> RResult<CommandOutput> {
    let series = partition_series(&cfg.activity, &cfg.region, cfg.truncation, cfg.samples)?;
    let mut table = Table::new(vec!["k", "order_re", "order_im"]);
    for (k, c) in series.orders.iter().enumerate() {
        table.push(vec![Cell::U(k as u64), Cell::F(c.re), Cell::F(c.im)]);
    }
    let summary = format!(
        "Z = {} + {} i\nstderr = {}\ntruncation = {}\ntail_estimate = {}\n",
        fmt_f(series.value.re),
        fmt_f(series.value.im),
        fmt_f(series.stderr),
        series.truncation,
        fmt_f(series.tail_estimate),
    );
    Ok(CommandOutput {
        summary,
        table: Some(table),
        text: None,
    })
}

pub fn cmd_mc(cfg: &RunConfig) -> RResult<CommandOutput> {
    let result = repgas::mc::run_birth_death(&cfg.activity, &cfg.region, &cfg.mc)?;
    let mut table = Table::new(vec!["chain", "seed", "steps", "mean_count", "stderr"]);
    for chain in &result.chains {
        table.push(vec![
            Cell::U(chain.chain as u64),
            Cell::U(chain.seed),
            Cell::U(chain.steps),
            Cell::F(chain.mean_count),
            Cell::F(chain.stderr),
        ]);
    }
    let volume = cfg.region.volume();
    let mut summary = format!(
        "mean_count = {} (stderr {})\nmean_density = {}\n",
        fmt_f(result.mean_count),
        fmt_f(result.mean_count_stderr),
        fmt_f(result.mean_count / volume),
    );
    if cfg.potential.temperedness_constant()? == 0.0 {
        if let Some(lambda) = cfg.activity.real_constant_lambda() {
            if lambda > 0.0 {
                let p = poisson_gof(&result.count_histogram, lambda * volume)?;
                summary.push_str(&format!("poisson_gof_p = {}\n", fmt_f(p)));
            }
        }
    }
    Ok(CommandOutput {
        summary,
        table: Some(table),
        text: None,
    })
}

pub fn cmd_compare(cfg: &RunConfig) -> RResult<CommandOutput> {
    let rec = density_with(&cfg.activity, &cfg.v, cfg.depth, &cfg.recursion)?;
    let ora_v = density_oracle(&cfg.activity, &cfg.region, &cfg.v, cfg.truncation, cfg.samples)?;
    let ora_mean = mean_density(&cfg.activity, &cfg.region, cfg.truncation, cfg.samples)?;
    let mc = repgas::mc::run_birth_death(&cfg.activity, &cfg.region, &cfg.mc)?;

    let volume = cfg.region.volume();
    let mc_mean = mc.mean_count / volume;
    let mc_rho_v = if cfg.region.dimension() == 1 {
        let (lo, hi) = cfg.region.bounding_box();
        let bins = mc.density_histogram.len();
        let rel = (cfg.v[0] - lo[0]) / (hi[0] - lo[0]) * bins as f64;
        let bin = (rel as usize).min(bins - 1);
        Some(mc.density_histogram[bin])
    } else {
        None
    };

    let mut table = Table::new(vec![
        "engine",
        "rho_v",
        "mean_density",
        "diff_rho_v",
        "diff_mean_density",
        "stderr",
    ]);
    table.push(vec![
        Cell::S("recursion".into()),
        Cell::F(rec.estimate.value.re),
        Cell::Empty,
        Cell::F((rec.estimate.value.re - ora_v.re).abs()),
        Cell::Empty,
        Cell::Empty,
    ]);
    table.push(vec![
        Cell::S("oracle".into()),
        Cell::F(ora_v.re),
        Cell::F(ora_mean.density),
        Cell::F(0.0),
        Cell::F(0.0),
        Cell::Empty,
    ]);
    table.push(vec![
        Cell::S("mc".into()),
        match mc_rho_v {
            Some(x) => Cell::F(x),
            None => Cell::Empty,
        },
        Cell::F(mc_mean),
        match mc_rho_v {
            Some(x) => Cell::F((x - ora_v.re).abs()),
            None => Cell::Empty,
        },
        Cell::F((mc_mean - ora_mean.density).abs()),
        Cell::F(mc.mean_count_stderr / volume),
    ]);

    let summary = format!(
        "rho_v: recursion {}, oracle {}{}\nmean_density: oracle {}, mc {} (stderr {})\n",
        fmt_f(rec.estimate.value.re),
        fmt_f(ora_v.re),
        match mc_rho_v {
            Some(x) => format!(", mc {}", fmt_f(x)),
            None => String::new(),
        },
        fmt_f(ora_mean.density),
        fmt_f(mc_mean),
        fmt_f(mc.mean_count_stderr / volume),
    );
    Ok(CommandOutput {
        summary,
        table: Some(table),
        text: None,
    })
}
