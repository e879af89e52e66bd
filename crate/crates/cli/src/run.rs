//! Command dispatch. Every artifact goes under `cfg.out`.

use std::path::{Path, PathBuf};

use pce_hinf::eval::{moment_error, norm_samples, simulate_stats, transform_error, SimConfig, TrajectoryStats};
use pce_hinf::galerkin::{assemble_closed_loop, assemble_legacy, expand_blocks, ExpandedClosedLoop};
use pce_hinf::hinf::DEFAULT_TOL as HINF_TOL;
use pce_hinf::linalg::Mat;
use pce_hinf::plant::{benchmark, Gain, UncertainPlant};
use pce_hinf::polychaos::{build_basis, OrthonormalBasis};
use pce_hinf::sdp::DEFAULT_MARGIN as SDP_MARGIN;
use pce_hinf::synth::{
    recheck, rho_bisection, stability_post_analysis_with, synthesize, KInit, SynthesisConfig, SynthesisMode,
    SynthesisResult,
};
use pce_hinf::Execution;
use sha2::{Digest, Sha256};

use crate::config::{Command, ModeArg, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{num, read_matrix, write_csv, write_matrix, Metadata};
use crate::plant_io::{parse_plant, serialize_plant};

/// Files written by a run and a short human-readable report.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
    pub report: Vec<String>,
}

/// Relative tolerance for the published-gain comparison.
pub const TABLE1_RTOL: f64 = 0.01;

struct Ctx<'a> {
    cfg: &'a RunConfig,
    plant: UncertainPlant,
    meta: Metadata,
    exec: Execution,
    out: Artifacts,
}

impl Ctx<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let p = write_csv(&self.path(name), &self.meta.with("artifact", name), header, rows)?;
        self.out.files.push(p);
        Ok(())
    }

    fn matrix(&mut self, name: &str, m: &Mat) -> Result<()> {
        let p = write_matrix(&self.path(name), &self.meta.with("artifact", name), m)?;
        self.out.files.push(p);
        Ok(())
    }

    fn basis(&self) -> Result<OrthonormalBasis> {
        Ok(build_basis(&self.plant.dist, self.cfg.degree, self.plant.degree(), self.cfg.quad_nodes)?)
    }

    fn x0(&self) -> Result<Vec<f64>> {
        let n_x = self.plant.dims().n_x;
        match &self.cfg.x0 {
            None => Ok(vec![1.0; n_x]),
            Some(v) if v.len() == n_x => Ok(v.clone()),
            Some(v) => Err(CliError::Usage(format!("x0 has {} entries, the plant has {n_x} states", v.len()))),
        }
    }

    fn sim_config(&self) -> SimConfig {
        SimConfig {
            t_end: self.cfg.t_end,
            dt: self.cfg.dt,
            record_every: self.cfg.record_every,
            n_mc: self.cfg.mc,
            seed: self.cfg.seed,
            execution: self.exec,
            ..SimConfig::default()
        }
    }
}

fn gain_from_config(cfg: &RunConfig) -> Result<Option<Gain>> {
    let m = match (&cfg.gain, &cfg.gain_file) {
        (Some(rows), _) => {
            let cols = rows.first().map_or(0, Vec::len);
            if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
                return Err(CliError::Usage("gain must be a nonempty rectangular matrix".into()));
            }
            Mat::from_fn(rows.len(), cols, |i, j| rows[i][j])
        }
        (None, Some(path)) => read_matrix(path)?,
        (None, None) => return Ok(None),
    };
    Ok(Some(Gain::new(m)?))
}

fn require_gain(cfg: &RunConfig, plant: &UncertainPlant) -> Result<Gain> {
    let k = gain_from_config(cfg)?
        .ok_or_else(|| CliError::Usage(format!("`{}` needs a gain (--gain or --gain-file)", cfg.command.map_or("", Command::name))))?;
    k.check_dims(&plant.dims())?;
    Ok(k)
}

fn gain_text(k: &Gain) -> String {
    k.matrix()
        .row_iter()
        .map(|r| r.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("; ")
}

fn mode(m: ModeArg) -> SynthesisMode {
    match m {
        ModeArg::WorstCase => SynthesisMode::WorstCase,
        ModeArg::NominalPce => SynthesisMode::NominalPce,
        ModeArg::RobustPce => SynthesisMode::RobustPce,
    }
}

fn kv(rows: &[(&str, String)]) -> Vec<Vec<String>> {
    rows.iter().map(|(k, v)| vec![k.to_string(), v.clone()]).collect()
}

/// Validates the configuration, runs its command and writes the artifacts.
pub fn run(cfg: &RunConfig) -> Result<Artifacts> {
    cfg.validate()?;
    let command = cfg.command.ok_or_else(|| CliError::Usage("no command given".into()))?;
    let plant = match (&cfg.plant, command) {
        (Some(p), _) => parse_plant(p)?,
        (None, Command::ReproduceTable1) => benchmark::plant(),
        (None, _) => return Err(CliError::Usage(format!("`{}` needs a plant file (--plant)", command.name()))),
    };
    let mut meta = Metadata::default();
    meta.push("pce-hinf", env!("CARGO_PKG_VERSION"));
    meta.push("command", command.name());
    meta.push("config_sha256", cfg.hash());
    meta.push("plant_sha256", hex::encode(Sha256::digest(serialize_plant(&plant).as_bytes())));
    meta.push("seed", cfg.seed);
    meta.push("hinf_tol", num(HINF_TOL));
    meta.push("sdp_margin", num(SDP_MARGIN));
    meta.push("gamma_tol", num(cfg.gamma_tol));
    meta.push("stability_margin", num(cfg.stability_margin));
    let mut ctx = Ctx { cfg, plant, meta, exec: Execution::default(), out: Artifacts::default() };
    match command {
        Command::Transform => transform(&mut ctx)?,
        Command::Synthesize => synthesize_cmd(&mut ctx)?,
        Command::Analyze => analyze(&mut ctx)?,
        Command::Evaluate => evaluate(&mut ctx)?,
        Command::ReproduceTable1 => table1(&mut ctx)?,
    }
    Ok(ctx.out)
}

fn closed_loop_dump(ctx: &mut Ctx, tag: &str, cl: &ExpandedClosedLoop) -> Result<()> {
    for (name, m) in [("A", &cl.a), ("B", &cl.b), ("C", &cl.c), ("D", &cl.d)] {
        ctx.matrix(&format!("transform_{tag}_{name}.csv"), m)?;
    }
    Ok(())
}

fn transform(ctx: &mut Ctx) -> Result<()> {
    let basis = ctx.basis()?;
    let blocks = expand_blocks(&ctx.plant, &basis)?;
    ctx.meta.push("degree", blocks.p);
    ctx.meta.push("output_degree", blocks.q);
    let rows: Vec<Vec<String>> = (0..basis.size_for_degree(blocks.q))
        .map(|i| {
            let mut r = vec![i.to_string()];
            r.extend(basis.multi_index(i).exponents().iter().map(u32::to_string));
            r
        })
        .collect();
    let mut header = vec!["index".to_string()];
    header.extend((1..=basis.n_xi()).map(|k| format!("xi{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    ctx.csv("transform_basis.csv", &header, &rows)?;
    ctx.matrix("transform_A.csv", &blocks.a_cal)?;
    ctx.matrix("transform_B_w.csv", &blocks.b_w_cal)?;
    for (k, m) in blocks.b_hat.iter().enumerate() {
        ctx.matrix(&format!("transform_B_hat_{k}.csv"), m)?;
    }
    for (k, m) in blocks.c_hat.iter().enumerate() {
        ctx.matrix(&format!("transform_C_hat_{k}.csv"), m)?;
    }
    for (k, m) in blocks.d_w_hat.iter().enumerate() {
        ctx.matrix(&format!("transform_D_w_hat_{k}.csv"), m)?;
    }
    if let Some(k) = gain_from_config(ctx.cfg)? {
        k.check_dims(&ctx.plant.dims())?;
        closed_loop_dump(ctx, "proposed", &assemble_closed_loop(&blocks, &k)?)?;
        closed_loop_dump(ctx, "legacy", &assemble_legacy(&blocks, &k)?)?;
    }
    ctx.out.report.push(format!(
        "p = {}, q = {}, expanded states = {}",
        blocks.p,
        blocks.q,
        blocks.n_states()
    ));
    Ok(())
}

fn synthesis_rows(r: &SynthesisResult, recheck_slack: f64) -> Vec<Vec<String>> {
    let mode = match r.mode {
        SynthesisMode::WorstCase => "worst-case",
        SynthesisMode::NominalPce => "nominal-pce",
        SynthesisMode::RobustPce => "robust-pce",
    };
    kv(&[
        ("mode", mode.into()),
        ("gain", gain_text(&r.k)),
        ("gamma", num(r.gamma)),
        ("rho2", num(r.rho2)),
        ("tau", r.tau.map_or_else(String::new, num)),
        ("iterations", r.iterations.to_string()),
        ("certificate_slack", num(r.certificate_slack)),
        ("recheck_slack", num(recheck_slack)),
        ("stable", r.stability.stable.to_string()),
        ("max_real_part", num(r.stability.max_real_part)),
        ("stability_grid_points", r.stability.grid_points.to_string()),
    ])
}

fn synthesize_cmd(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let k_init = match gain_from_config(cfg)? {
        Some(k) => KInit::Given(k),
        None => KInit::Auto,
    };
    let scfg = SynthesisConfig {
        mode: mode(cfg.mode),
        p: cfg.degree,
        rho2: cfg.rho2,
        k_init,
        max_outer_iters: cfg.max_outer_iters,
        gamma_tol: cfg.gamma_tol,
        restarts: cfg.restarts,
        seed: cfg.seed,
        vertices: cfg.vertices.clone(),
        grid_n: cfg.stability_grid,
        stability_margin: cfg.stability_margin,
        execution: ctx.exec,
    };
    let basis = match scfg.mode {
        SynthesisMode::WorstCase => None,
        _ => Some(ctx.basis()?),
    };
    ctx.meta.push("degree", cfg.degree);
    ctx.meta.push("restarts", cfg.restarts);
    let result = if cfg.bisect {
        if scfg.mode != SynthesisMode::RobustPce {
            return Err(CliError::Usage("bisect requires mode robust-pce".into()));
        }
        let basis = basis.as_ref().expect("PCE mode has a basis");
        let (rho2_min, r) = rho_bisection(&ctx.plant, basis, &scfg, cfg.rho2)?;
        ctx.csv(
            "rho_bisection.csv",
            &["key", "value"],
            &kv(&[("rho2_hi", num(cfg.rho2)), ("rho2_min", num(rho2_min)), ("rho2_tol", num(pce_hinf::synth::RHO2_TOL))]),
        )?;
        ctx.out.report.push(format!("rho2_min = {}", num(rho2_min)));
        r
    } else {
        synthesize(&ctx.plant, basis.as_ref(), &scfg)?
    };
    let slack = recheck(&ctx.plant, basis.as_ref(), &result)?;
    ctx.matrix("gain.csv", result.k.matrix())?;
    ctx.csv("synthesis.csv", &["key", "value"], &synthesis_rows(&result, slack))?;
    let trace: Vec<Vec<String>> = result
        .traces
        .iter()
        .enumerate()
        .flat_map(|(r, t)| t.iter().enumerate().map(move |(i, &g)| vec![r.to_string(), i.to_string(), num(g)]))
        .collect();
    ctx.csv("trace.csv", &["restart", "iteration", "gamma"], &trace)?;
    ctx.out.report.push(format!(
        "K = [{}], gamma = {}, stable = {}",
        gain_text(&result.k),
        num(result.gamma),
        result.stability.stable
    ));
    Ok(())
}

fn analyze(ctx: &mut Ctx) -> Result<()> {
    let k = require_gain(ctx.cfg, &ctx.plant)?;
    ctx.meta.push("gain", gain_text(&k));
    ctx.meta.push("grid", ctx.cfg.grid);
    let st = stability_post_analysis_with(&ctx.plant, &k, ctx.cfg.stability_grid, ctx.cfg.stability_margin, ctx.exec);
    let worst_xi = st.worst_xi.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" ");
    ctx.csv(
        "stability.csv",
        &["key", "value"],
        &kv(&[
            ("grid_points", st.grid_points.to_string()),
            ("max_real_part", num(st.max_real_part)),
            ("worst_xi", worst_xi),
            ("margin", num(st.margin)),
            ("stable", st.stable.to_string()),
        ]),
    )?;
    let nd = norm_samples(&ctx.plant, &k, ctx.cfg.grid, ctx.exec)?;
    let mut header: Vec<String> = (1..=ctx.plant.n_xi()).map(|i| format!("xi{i}")).collect();
    header.push("gamma".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = nd
        .xi
        .iter()
        .zip(&nd.gamma)
        .map(|(x, &g)| x.iter().map(|&v| num(v)).chain([num(g)]).collect())
        .collect();
    ctx.csv("norms.csv", &header, &rows)?;
    ctx.csv(
        "summary.csv",
        &["gain", "worst_case_hinf", "averaged_hinf", "unstable_samples", "stable"],
        &[vec![
            gain_text(&k),
            num(nd.worst_case),
            num(nd.averaged),
            nd.unstable.len().to_string(),
            st.stable.to_string(),
        ]],
    )?;
    ctx.out.report.push(format!(
        "worst_case_hinf = {}, averaged_hinf = {}, stable = {}",
        num(nd.worst_case),
        num(nd.averaged),
        st.stable
    ));
    Ok(())
}

fn trajectory_rows(s: &TrajectoryStats) -> Vec<Vec<String>> {
    s.t.iter()
        .enumerate()
        .map(|(i, &t)| std::iter::once(num(t)).chain(s.mean[i].iter().map(|&v| num(v))).chain(s.var[i].iter().map(|&v| num(v))).collect())
        .collect()
}

fn evaluate(ctx: &mut Ctx) -> Result<()> {
    let k = require_gain(ctx.cfg, &ctx.plant)?;
    let basis = ctx.basis()?;
    let x0 = ctx.x0()?;
    let sim = ctx.sim_config();
    let x0_text = x0.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" ");
    for (key, v) in [
        ("gain", gain_text(&k)),
        ("degree", ctx.cfg.degree.to_string()),
        ("x0", x0_text),
        ("t_end", num(sim.t_end)),
        ("dt", num(sim.dt)),
        ("n_mc", sim.n_mc.to_string()),
        ("error_nodes", ctx.cfg.error_nodes.to_string()),
    ] {
        ctx.meta.push(key, v);
    }
    let (mc, proposed, legacy) = simulate_stats(&ctx.plant, &k, &basis, &x0, &sim)?;
    let n_x = x0.len();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n_x).map(|i| format!("mean_{i}")));
    header.extend((1..=n_x).map(|i| format!("var_{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    for s in [&mc, &proposed, &legacy] {
        ctx.csv(&format!("trajectory_{}.csv", s.source.tag()), &header, &trajectory_rows(s))?;
    }
    let (state_p, state_l) = transform_error(&ctx.plant, &k, &basis, &x0, &sim, ctx.cfg.error_nodes)?;
    let me = moment_error(&ctx.plant, &k, &basis, &x0, &sim, ctx.cfg.error_nodes)?;
    let rows = vec![
        vec!["state".into(), num(state_p), num(state_l)],
        vec!["mean".into(), num(me.mean_proposed), num(me.mean_legacy)],
        vec!["variance".into(), num(me.var_proposed), num(me.var_legacy)],
    ];
    ctx.csv("transform_error.csv", &["quantity", "proposed", "legacy"], &rows)?;
    ctx.out.report.push(format!(
        "state error: proposed {} legacy {}; mean error: proposed {} legacy {}; variance error: proposed {} legacy {}",
        num(state_p),
        num(state_l),
        num(me.mean_proposed),
        num(me.mean_legacy),
        num(me.var_proposed),
        num(me.var_legacy)
    ));
    Ok(())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn table1(ctx: &mut Ctx) -> Result<()> {
    let grid = ctx.cfg.grid;
    ctx.meta.push("grid", grid);
    ctx.meta.push("rtol", num(TABLE1_RTOL));
    let mut rows = Vec::new();
    for (label, k, (ref_wc, ref_avg)) in benchmark::reference_gains() {
        let k = Gain::row(&k)?;
        k.check_dims(&ctx.plant.dims())?;
        let nd = norm_samples(&ctx.plant, &k, grid, ctx.exec)?;
        let (ew, ea) = (rel(nd.worst_case, ref_wc), rel(nd.averaged, ref_avg));
        let ok = ew <= TABLE1_RTOL && ea <= TABLE1_RTOL;
        ctx.out.report.push(format!(
            "{label}: worst {} (ref {}), averaged {} (ref {}) {}",
            num(nd.worst_case),
            num(ref_wc),
            num(nd.averaged),
            num(ref_avg),
            if ok { "ok" } else { "MISMATCH" }
        ));
        rows.push(vec![
            label.to_string(),
            gain_text(&k),
            num(nd.worst_case),
            num(nd.averaged),
            num(ref_wc),
            num(ref_avg),
            num(ew),
            num(ea),
            ok.to_string(),
        ]);
    }
    ctx.csv(
        "table1.csv",
        &[
            "method",
            "gain",
            "worst_case_hinf",
            "averaged_hinf",
            "reference_worst_case_hinf",
            "reference_averaged_hinf",
            "rel_err_worst_case",
            "rel_err_averaged",
            "within_tolerance",
        ],
        &rows,
    )
}

/// Loads `path` if given, else the default configuration.
pub fn load_or_default(path: Option<&Path>) -> Result<RunConfig> {
    path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
}
