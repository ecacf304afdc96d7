use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use fluency_core::corpus::{
    category_transitions, code_categories, gold_frequencies, load_frequencies, load_runs,
    load_scheme, save_runs, write_runs_csv, CategoryCoding, CategoryIndex, CategoryScheme,
    FrequencyTable, RunBank, RunFormat,
};
use fluency_core::cues::{
    load_external, CueModel, CueWeights, ExternalModel, LoglikOptions, NextModel, SubcategoryCue,
};
use fluency_core::eval::{corpus_eval, switch_profile, EvalOptions};
use fluency_core::fit::{fit_betas, fit_betas_cv, GridSpec};
use fluency_core::lexicon::{ExemplarId, Lexicon};
use fluency_core::network::{
    build_association_network, build_similarity_network, load_embeddings, load_norms,
    SemanticNetwork,
};
use fluency_core::search::{
    generate_many, walk_many, GenerationConfig, LengthPolicy, SearchMethod,
};
use log::{info, warn};

use crate::args::*;
use crate::error::CliError;

type Out = Box<dyn Write>;

fn open_output(path: Option<&Path>) -> Result<Out, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish(mut out: Out, path: Option<&Path>) -> Result<(), CliError> {
    out.flush()
        .map_err(|e| CliError::io(path.unwrap_or(Path::new("<stdout>")), e))
}

fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Out>, CliError> {
    Ok(csv::Writer::from_writer(open_output(path)?))
}

fn csv_done(mut w: csv::Writer<Out>, path: Option<&Path>) -> Result<(), CliError> {
    let label = path.unwrap_or(Path::new("<stdout>"));
    w.flush().map_err(|e| CliError::io(label, e))
}

fn csv_row<I, S>(w: &mut csv::Writer<Out>, path: Option<&Path>, row: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(row).map_err(|e| {
        let label = path.unwrap_or(Path::new("<stdout>")).to_owned();
        CliError::io(label, io::Error::other(e))
    })
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let mut out = open_output(path)?;
    let label = || path.unwrap_or(Path::new("<stdout>")).to_owned();
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| CliError::io(label(), io::Error::other(e)))?;
    writeln!(out).map_err(|e| CliError::io(label(), e))?;
    finish(out, path)
}

fn load_bank(path: &Path) -> Result<RunBank, CliError> {
    Ok(load_runs(path, RunFormat::from_path(path)?)?)
}

fn global_table(
    src: &GlobalSource,
    runs: Option<&RunBank>,
) -> Result<Option<FrequencyTable>, CliError> {
    if let Some(p) = &src.frequencies {
        return Ok(Some(load_frequencies(p)?));
    }
    if src.gold {
        let bank = runs.ok_or_else(|| CliError::usage("--gold needs --runs"))?;
        return Ok(Some(gold_frequencies(bank)?));
    }
    Ok(None)
}

fn parse_betas(text: Option<&str>, default: CueWeights) -> Result<CueWeights, CliError> {
    match text {
        Some(t) => Ok(t.parse()?),
        None => Ok(default),
    }
}

fn load_network(path: &Path, global: Option<&FrequencyTable>) -> Result<SemanticNetwork, CliError> {
    let net = SemanticNetwork::load(path)?;
    Ok(match global {
        Some(table) => net.attach_global(table)?,
        None => net,
    })
}

fn subcategory(
    weights: CueWeights,
    nodes: &Lexicon,
    scheme: Option<&CategoryScheme>,
    bank: Option<&RunBank>,
    coding: CategoryCoding,
) -> Result<Option<SubcategoryCue>, CliError> {
    if weights.beta_subcat == 0.0 {
        return Ok(None);
    }
    let scheme = scheme.ok_or_else(|| CliError::usage("beta_subcat > 0 needs --scheme"))?;
    let bank = bank
        .ok_or_else(|| CliError::usage("beta_subcat > 0 needs --runs to estimate transitions"))?;
    let trans = category_transitions(bank, scheme, coding)?;
    Ok(Some(
        SubcategoryCue::new(nodes, scheme, trans)?.with_coding(coding),
    ))
}

/// Bank runs as network ids; exemplars outside the network are dropped.
fn runs_on(bank: &RunBank, nodes: &Lexicon) -> Vec<Vec<ExemplarId>> {
    let ids = bank.reindex(nodes);
    let dropped = bank.total_tokens() - ids.iter().map(Vec::len).sum::<usize>();
    if dropped > 0 {
        warn!("{dropped} run item(s) are not network nodes and were skipped");
    }
    ids
}

pub fn build_network(a: &BuildNetworkArgs) -> Result<(), CliError> {
    let bank = load_bank(&a.runs)?;
    let lexicon = bank.lexicon();
    let net = if let Some(path) = &a.embeddings {
        let mut keep: HashSet<String> = HashSet::new();
        for s in lexicon.surfaces() {
            keep.insert(s.clone());
            keep.extend(s.split(' ').map(str::to_owned));
        }
        let emb = load_embeddings(path, Some(&keep))?;
        let (net, dropped) = build_similarity_network(&emb, lexicon, a.epsilon)?;
        if !dropped.is_empty() {
            warn!(
                "{} exemplar(s) have no vector and were left out: {}",
                dropped.len(),
                dropped.join(", ")
            );
        }
        net
    } else {
        let path = a
            .norms
            .as_ref()
            .ok_or_else(|| CliError::usage("one of --embeddings or --norms is required"))?;
        build_association_network(&load_norms(path)?, lexicon)?
    };
    let net = match global_table(&a.global, Some(&bank))? {
        Some(t) => net.attach_global(&t)?,
        None => net,
    };
    info!(
        "network: {} nodes, {} edges, epsilon {}",
        net.len(),
        net.num_edges(),
        net.epsilon()
    );
    net.save(&a.output)?;
    Ok(())
}

pub fn transitions(a: &TransitionsArgs) -> Result<(), CliError> {
    let bank = load_bank(&a.runs)?;
    let scheme = load_scheme(&a.scheme)?;
    let trans = category_transitions(&bank, &scheme, a.coding.into())?;
    let path = a.output.as_deref();
    let mut w = csv_writer(path)?;
    csv_row(&mut w, path, ["from", "to", "prob", "count"])?;
    for (i, j, p) in trans.edges_above(a.threshold) {
        let names = scheme.categories();
        csv_row(
            &mut w,
            path,
            [
                names[i].clone(),
                names[j].clone(),
                p.to_string(),
                trans.count(i, j).to_string(),
            ],
        )?;
    }
    csv_done(w, path)
}

fn write_generations(
    lexicon: &Lexicon,
    seqs: &[Vec<ExemplarId>],
    path: Option<&Path>,
) -> Result<(), CliError> {
    let bank = RunBank::from_sequences(
        seqs.iter()
            .enumerate()
            .map(|(i, s)| (format!("gen-{i}"), lexicon.render(s), None)),
    )?;
    match path {
        Some(p) => save_runs(&bank, p, RunFormat::from_path(p)?)?,
        None => {
            let mut out = open_output(None)?;
            write_runs_csv(&mut out, &bank)?;
            finish(out, None)?;
        }
    }
    Ok(())
}

pub fn generate(a: &GenerateArgs) -> Result<(), CliError> {
    if a.tau.is_some() && a.search != Search::Sample {
        return Err(CliError::usage("--tau only applies to --search sample"));
    }
    if a.beam_width.is_some() && a.search != Search::Beam {
        return Err(CliError::usage(
            "--beam-width only applies to --search beam",
        ));
    }
    if a.search == Search::Walk && (a.model.external.is_some() || a.model.betas.is_some()) {
        return Err(CliError::usage(
            "--search walk uses the network alone; drop --external and --betas",
        ));
    }
    if a.n == 0 {
        return Err(CliError::usage("--n must be >= 1"));
    }
    let bank = a.runs.as_deref().map(load_bank).transpose()?;
    let length = match (a.length, &bank) {
        (Some(n), _) => LengthPolicy::Fixed(n),
        (None, Some(b)) => LengthPolicy::Empirical(b.run_lengths()),
        (None, None) => {
            return Err(CliError::usage(
                "give --length or --runs for the length distribution",
            ))
        }
    };
    let cfg = GenerationConfig {
        length,
        seed: a.seed,
        temperature: a.tau.unwrap_or(1.0),
        beam_width: a.beam_width.unwrap_or(10),
        exclude_repeats: !a.allow_repeats,
    };
    let method = match a.search {
        Search::Greedy => SearchMethod::Greedy,
        Search::Beam => SearchMethod::Beam,
        Search::Sample => SearchMethod::Sample,
        Search::Walk => SearchMethod::Greedy,
    };
    let global = global_table(&a.model.global, bank.as_ref())?;
    let scheme = a.model.scheme.as_deref().map(load_scheme).transpose()?;
    let out = a.output.as_deref();
    if let Some(path) = &a.model.external {
        let dists = load_external(path, None)?;
        let model = external_model(&dists, global.as_ref(), a.model.betas.as_deref())?;
        let seqs = generate_many(&model, method, &cfg, a.n)?;
        return write_generations(dists.lexicon(), &seqs, out);
    }
    let net_path = a
        .model
        .network
        .as_deref()
        .ok_or_else(|| CliError::usage("--network or --external is required"))?;
    let net = load_network(net_path, global.as_ref())?;
    if a.search == Search::Walk {
        let seqs = walk_many(&net, &cfg, a.n)?;
        return write_generations(net.nodes(), &seqs, out);
    }
    let weights = parse_betas(a.model.betas.as_deref(), CueWeights::new(1.0, 1.0, 0.0)?)?;
    let sub = subcategory(
        weights,
        net.nodes(),
        scheme.as_ref(),
        bank.as_ref(),
        a.model.coding.into(),
    )?;
    let model = CueModel::new(&net, weights, sub.as_ref())?;
    let seqs = generate_many(&model, method, &cfg, a.n)?;
    write_generations(net.nodes(), &seqs, out)
}

fn external_model<'a>(
    dists: &'a fluency_core::cues::ExternalDistributions,
    global: Option<&'a FrequencyTable>,
    betas: Option<&str>,
) -> Result<ExternalModel<'a>, CliError> {
    let model = ExternalModel::new(dists);
    match global {
        Some(table) => {
            let w = parse_betas(betas, CueWeights::new(1.0, 1.0, 0.0)?)?;
            if w.beta_subcat != 0.0 {
                return Err(CliError::usage(
                    "external distributions take only l,g betas",
                ));
            }
            Ok(model.with_global(table, w.beta_local, w.beta_global))
        }
        None if betas.is_some() => Err(CliError::usage(
            "--betas with --external needs --frequencies or --gold",
        )),
        None => Ok(model),
    }
}

pub fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let gens = load_bank(&a.gens)?;
    let refs = load_bank(&a.refs)?;
    let scheme = load_scheme(&a.scheme)?;
    let opts = EvalOptions {
        coding: a.coding.into(),
        leave_one_out: a.leave_one_out,
    };
    let card = corpus_eval(&gens, &refs, &scheme, opts)?;
    write_json(&card, a.output.as_deref())
}

pub fn switch_profile_cmd(a: &SwitchProfileArgs) -> Result<(), CliError> {
    let bank = load_bank(&a.runs)?;
    let scheme_path = a
        .model
        .scheme
        .as_deref()
        .ok_or_else(|| CliError::usage("switch-profile needs --scheme"))?;
    let scheme = load_scheme(scheme_path)?;
    let global = global_table(&a.model.global, Some(&bank))?;
    let coding: CategoryCoding = a.model.coding.into();
    let exclude = !a.allow_repeats;
    let profile = if let Some(path) = &a.model.external {
        let dists = load_external(path, Some(bank.lexicon().clone()))?;
        let model = external_model(&dists, global.as_ref(), a.model.betas.as_deref())?;
        let runs: Vec<Vec<ExemplarId>> = bank.runs().iter().map(|r| r.items.clone()).collect();
        let index = CategoryIndex::new(model.lexicon(), &scheme);
        switch_profile(&model, &runs, &index, a.window, a.signal.into(), exclude)?
    } else {
        let net_path = a
            .model
            .network
            .as_deref()
            .ok_or_else(|| CliError::usage("--network or --external is required"))?;
        let net = load_network(net_path, global.as_ref())?;
        let weights = parse_betas(a.model.betas.as_deref(), CueWeights::new(1.0, 1.0, 0.0)?)?;
        let sub = subcategory(weights, net.nodes(), Some(&scheme), Some(&bank), coding)?;
        let model = CueModel::new(&net, weights, sub.as_ref())?;
        let index = CategoryIndex::new(net.nodes(), &scheme);
        switch_profile(
            &model,
            &runs_on(&bank, net.nodes()),
            &index,
            a.window,
            a.signal.into(),
            exclude,
        )?
    };
    let path = a.output.as_deref();
    let mut w = csv_writer(path)?;
    csv_row(&mut w, path, ["offset", "mean_signal", "n_events"])?;
    for ((o, v), n) in profile
        .offsets
        .iter()
        .zip(&profile.values)
        .zip(&profile.n_events)
    {
        let v = v.map(|x| x.to_string()).unwrap_or_default();
        csv_row(&mut w, path, [o.to_string(), v, n.to_string()])?;
    }
    csv_done(w, path)
}

pub fn fit(a: &FitArgs) -> Result<(), CliError> {
    let bank = load_bank(&a.runs)?;
    let global = global_table(&a.global, Some(&bank))?;
    let net = load_network(&a.network, global.as_ref())?;
    let values: Vec<f64> = a
        .grid
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::usage(format!("cannot parse --grid {:?}", a.grid)))?;
    let grid = GridSpec::new(values, !a.no_refine)?;
    let family: fluency_core::fit::ModelFamily = a.family.into();
    let coding: CategoryCoding = a.coding.into();
    let sub = match a.family {
        Family::LocalGlobal => None,
        Family::LocalGlobalSubcat => {
            let scheme_path = a
                .scheme
                .as_deref()
                .ok_or_else(|| CliError::usage("local-global-subcat needs --scheme"))?;
            let scheme = load_scheme(scheme_path)?;
            let trans = category_transitions(&bank, &scheme, coding)?;
            Some(SubcategoryCue::new(net.nodes(), &scheme, trans)?.with_coding(coding))
        }
    };
    let runs = runs_on(&bank, net.nodes());
    let opts = LoglikOptions {
        exclude_repeats: !a.allow_repeats,
        ..Default::default()
    };
    let result = match a.folds {
        Some(k) => fit_betas_cv(family, &net, sub.as_ref(), &runs, &grid, opts, k)?,
        None => fit_betas(family, &net, sub.as_ref(), &runs, &grid, opts)?,
    };
    info!(
        "best betas {:?} with log-likelihood {} over {} evaluations",
        result.weights.as_array(),
        result.loglik,
        result.evaluated.len()
    );
    write_json(&result, a.output.as_deref())
}

pub fn export_paths(a: &ExportPathsArgs) -> Result<(), CliError> {
    let gens = load_bank(&a.gens)?;
    let scheme = load_scheme(&a.scheme)?;
    let index = CategoryIndex::new(gens.lexicon(), &scheme);
    let path = a.output.as_deref();
    let mut w = csv_writer(path)?;
    csv_row(&mut w, path, ["run", "step", "exemplar", "category"])?;
    for run in gens.runs() {
        let codes = code_categories(&run.items, &index, a.coding.into());
        for (step, (&id, code)) in run.items.iter().zip(codes).enumerate() {
            let category = code
                .map(|c| scheme.categories()[c].clone())
                .unwrap_or_default();
            csv_row(
                &mut w,
                path,
                [
                    run.participant.clone(),
                    (step + 1).to_string(),
                    gens.lexicon().surface(id).to_owned(),
                    category,
                ],
            )?;
        }
    }
    csv_done(w, path)
}
