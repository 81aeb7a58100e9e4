use std::fmt;
use std::path::Path;

use compath::cospan::OpenMatrix;
use compath::gen::{Generator, Sample};
use compath::io::{self, Codec, Instance};
use compath::netgraph::{blackbox_graph, free_category, paths_of_length, OpenGraph};
use compath::pathsolve::{binomial_sides, is_functional, solve_compositional, solve_open, SolveMode};
use compath::qnet::{blackbox_reach, OpenNet, ResourceKind};
use compath::{dispatch, dispatch2, ClosureAlgorithm, Error, FiniteFunction, VertexSet};

use crate::{Algo, Cli, Command, GenKind, GraphCommand, Mode, NetCommand, Output};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Check(String),
    Lib(Error),
}

impl Failure {
    /// 1 usage, 2 parse, 3 semantic, 4 non-convergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Check(_) => 3,
            Failure::Lib(e) if e.is_parse() => 2,
            Failure::Lib(Error::NonConvergence { .. }) => 4,
            Failure::Lib(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Check(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Machine format to `--out` with a table on stdout, or machine format to stdout.
fn emit(output: &Output, machine: String, human: impl FnOnce() -> String) -> Outcome {
    match &output.out {
        Some(path) => {
            write(path, &machine)?;
            print!("{}", human());
            Ok(())
        }
        None => {
            print!("{machine}");
            Ok(())
        }
    }
}

fn algorithm(algo: Algo, max_iters: usize) -> ClosureAlgorithm {
    match algo {
        Algo::Fw => ClosureAlgorithm::Elimination,
        Algo::Series => ClosureAlgorithm::Series { max_terms: max_iters },
        Algo::Square => ClosureAlgorithm::Squaring { max_iters },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FileKind {
    Matrix,
    Graph,
    Net,
}

fn kind_of(text: &str) -> Result<FileKind, Failure> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(Error::from)?;
    let obj = v
        .as_object()
        .ok_or_else(|| Failure::Lib(Error::Format("expected a JSON object".into())))?;
    if obj.contains_key("quantale") {
        Ok(FileKind::Matrix)
    } else if obj.contains_key("kind") {
        Ok(FileKind::Net)
    } else if obj.contains_key("vertices") {
        Ok(FileKind::Graph)
    } else {
        Err(Failure::Lib(Error::Format("cannot tell a matrix, graph or net file apart".into())))
    }
}

fn has_boundary(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.as_object().map(|o| o.contains_key("inputs") || o.contains_key("outputs")))
        .unwrap_or(false)
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Solve {
            file,
            expr,
            algo,
            mode,
            max_iters,
            check_oracle,
            output,
        } => {
            let algo = algorithm(*algo, *max_iters);
            if *expr {
                solve_expr(file, algo, *mode, *check_oracle, *max_iters, output)
            } else {
                let text = read(file)?;
                let boundary = has_boundary(&text);
                let m = io::parse_open(&text)?;
                dispatch!(AnyOpen, m, m => solve_file(&m, boundary, algo, *check_oracle, *max_iters, output))
            }
        }
        Command::Compose { left, right, output } => {
            let (a, b) = (io::parse_open(&read(left)?)?, io::parse_open(&read(right)?)?);
            dispatch2!(AnyOpen, a, b, (a, b) => {
                let c = a.compose(&b)?;
                log::info!("composite carrier {:?}", c.carrier().to_vec());
                emit(output, io::write_open(&c), || io::render_table(c.matrix()))
            })
        }
        Command::Tensor { left, right, output } => {
            let (a, b) = (io::parse_open(&read(left)?)?, io::parse_open(&read(right)?)?);
            dispatch2!(AnyOpen, a, b, (a, b) => {
                let c = a.tensor(&b)?;
                emit(output, io::write_open(&c), || io::render_table(c.matrix()))
            })
        }
        Command::Blackbox {
            file,
            algo,
            max_iters,
            output,
        } => {
            let m = io::parse_open(&read(file)?)?;
            let algo = algorithm(*algo, *max_iters);
            dispatch!(AnyOpen, m, m => {
                let r = solve_open(&m, algo)?;
                emit(output, io::write_matrix(&r), || io::render_table(&r))
            })
        }
        Command::CheckFunctional { file } => check_functional(file),
        Command::BinomialCheck { left, right, max_power } => {
            let (a, b) = (io::parse_open(&read(left)?)?, io::parse_open(&read(right)?)?);
            dispatch2!(AnyOpen, a, b, (a, b) => binomial_check(&a, &b, *max_power))
        }
        Command::Graph(g) => graph(g),
        Command::Net(n) => net(n),
        Command::ExportDot { file, output } => {
            let text = read(file)?;
            let dot = match kind_of(&text)? {
                FileKind::Matrix => {
                    let m = io::parse_open(&text)?;
                    dispatch!(AnyOpen, m, m => io::matrix_to_dot(m.matrix()))
                }
                FileKind::Graph => io::graph_to_dot(io::parse_graph(&text)?.graph()),
                FileKind::Net => return Err(Failure::Usage("export-dot takes a matrix or graph file".into())),
            };
            emit(output, dot.clone(), || dot)
        }
        Command::Gen {
            what,
            quantale,
            size,
            arbitrary,
            out_dir,
        } => {
            let mut g = Generator::new(cli.seed);
            log::info!("generating with seed {}", cli.seed);
            let inst: Instance = quantale.parse()?;
            match inst {
                Instance::Tropical => generate(&mut g, &compath::Tropical, *what, *size, *arbitrary, out_dir),
                Instance::Capacity => generate(&mut g, &compath::Capacity, *what, *size, *arbitrary, out_dir),
                Instance::Viterbi => generate(&mut g, &compath::Viterbi, *what, *size, *arbitrary, out_dir),
                Instance::Boolean => generate(&mut g, &compath::Boolean, *what, *size, *arbitrary, out_dir),
                Instance::Language(l) => generate(&mut g, &l, *what, *size, *arbitrary, out_dir),
            }
        }
    }
}

fn solve_file<Q: Codec>(
    m: &OpenMatrix<Q>,
    boundary: bool,
    algo: ClosureAlgorithm,
    check_oracle: bool,
    max_iters: usize,
    output: &Output,
) -> Outcome {
    let closed = m.matrix().closure(algo)?;
    if check_oracle {
        let series = m.matrix().closure_series_stable(max_iters)?;
        if !series.closure.approx_eq(&closed) {
            return Err(Failure::Check("closure disagrees with the power series".into()));
        }
        log::info!("series oracle agrees, stabilized at {}", series.stabilized_at);
    }
    let machine = if boundary {
        io::write_open(&m.with_matrix(closed.clone())?)
    } else {
        io::write_matrix(&closed)
    };
    emit(output, machine, || io::render_table(&closed))
}

fn solve_expr(
    path: &Path,
    algo: ClosureAlgorithm,
    mode: Mode,
    check_oracle: bool,
    max_iters: usize,
    output: &Output,
) -> Outcome {
    let mode = match mode {
        Mode::Auto => SolveMode::Auto,
        Mode::Glued => SolveMode::Glued,
        Mode::Compositional => SolveMode::Compositional,
    };
    let e = io::load_expr(path)?;
    dispatch!(AnyExpr, e, e => {
        let report = solve_compositional(&e, algo, mode)?;
        log::info!("{} fast and {} glued compose nodes", report.fast_nodes, report.fallback_nodes);
        if check_oracle {
            let oracle = solve_open(&e.glue()?, ClosureAlgorithm::Series { max_terms: max_iters })?;
            if !oracle.approx_eq(&report.result) {
                return Err(Failure::Check("solution disagrees with the series on the glued network".into()));
            }
        }
        let fast = report.fast_nodes;
        let glued = report.fallback_nodes;
        emit(output, io::write_matrix(&report.result), || {
            format!("{}compose nodes: {fast} by product, {glued} by gluing\n", io::render_table(&report.result))
        })
    })
}

fn binomial_check<Q: Codec>(a: &OpenMatrix<Q>, b: &OpenMatrix<Q>, max_power: usize) -> Outcome {
    let mut bad = Vec::new();
    for n in 0..=max_power {
        let (left, right) = binomial_sides(a, b, n)?;
        let ok = left.approx_eq(&right);
        println!("n = {n}: {}", if ok { "equal" } else { "differ" });
        if !ok {
            bad.push(n);
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("binomial sides differ at n = {bad:?}")))
    }
}

fn check_functional(file: &Path) -> Outcome {
    let text = read(file)?;
    let ok = match kind_of(&text)? {
        FileKind::Matrix => {
            let m = io::parse_open(&text)?;
            dispatch!(AnyOpen, m, m => is_functional(&m))
        }
        FileKind::Graph => io::parse_graph(&text)?.is_functional(),
        FileKind::Net => io::parse_net(&text)?.is_functional(),
    };
    println!("{}", if ok { "functional" } else { "not functional" });
    Ok(())
}

fn load_graph(path: &Path) -> Result<OpenGraph, Failure> {
    Ok(io::parse_graph(&read(path)?)?)
}

fn graph(cmd: &GraphCommand) -> Outcome {
    match cmd {
        GraphCommand::Paths {
            file,
            bound,
            length,
            output,
        } => {
            let g = load_graph(file)?;
            let t = match length {
                Some(n) if n > bound => {
                    return Err(Failure::Usage(format!("--length {n} exceeds the bound {bound}")));
                }
                Some(n) => paths_of_length(g.graph(), *n),
                None => free_category(g.graph(), *bound),
            };
            emit(output, io::write_path_table(&t), || io::render_path_table(&t))
        }
        GraphCommand::Blackbox {
            file,
            then,
            bound,
            output,
        } => {
            let mut g = load_graph(file)?;
            if let Some(next) = then {
                g = g.compose(&load_graph(next)?)?;
            }
            let t = blackbox_graph(&g, *bound);
            emit(output, io::write_path_table(&t), || io::render_path_table(&t))
        }
        GraphCommand::Compose { left, right, output } => {
            let c = load_graph(left)?.compose(&load_graph(right)?)?;
            let text = io::write_graph(&c);
            emit(output, text.clone(), || text)
        }
        GraphCommand::ImportDot { file, output } => {
            let g = io::parse_dot(&read(file)?)?;
            let vs = g.vertices().clone();
            let empty = |cod: &VertexSet| FiniteFunction::new(VertexSet::empty(), cod.clone(), Vec::new());
            let text = io::write_graph(&OpenGraph::new(g, empty(&vs)?, empty(&vs)?)?);
            emit(output, text.clone(), || text)
        }
    }
}

fn load_net(path: &Path) -> Result<OpenNet, Failure> {
    Ok(io::parse_net(&read(path)?)?)
}

fn net(cmd: &NetCommand) -> Outcome {
    match cmd {
        NetCommand::Fire {
            file,
            marking,
            transition,
            minimal,
            output,
        } => {
            let p = load_net(file)?;
            let net = p.net();
            let m = io::parse_marking(net, marking)?;
            let out = if *minimal {
                net.fire_minimal(&m, transition)?.into_iter().collect()
            } else {
                net.fire(&m, transition)?
            };
            emit(output, io::write_markings(net, &out), || {
                out.iter().map(|r| format!("{}\n", r.display(net.places()))).collect()
            })
        }
        NetCommand::Reach {
            file,
            marking,
            depth,
            cap,
            output,
        } => {
            let p = load_net(file)?;
            let net = p.net();
            let m = io::parse_marking(net, marking)?;
            let r = net.reachable(&m, *depth, *cap);
            if r.pruned > 0 {
                log::warn!("{} markings pruned by the coefficient cap", r.pruned);
            }
            emit(output, io::write_reachability(net, &r), || io::render_reachability(net, &r))
        }
        NetCommand::Compose { left, right, output } => {
            let c = load_net(left)?.compose(&load_net(right)?)?;
            let text = io::write_net(&c);
            emit(output, text.clone(), || text)
        }
        NetCommand::Blackbox {
            file,
            cap,
            depth,
            output,
        } => {
            let rel = blackbox_reach(&load_net(file)?, *cap, *depth);
            emit(output, io::write_relation(&rel), || rel.render().join("\n") + "\n")
        }
        NetCommand::Translate { file, to, output } => {
            let p = load_net(file)?;
            let to: ResourceKind = to.parse()?;
            let t = OpenNet::new(p.net().translate(to)?, p.leg_in().clone(), p.leg_out().clone())?;
            let text = io::write_net(&t);
            emit(output, text.clone(), || text)
        }
    }
}

fn generate<Q: Sample + Codec>(
    g: &mut Generator,
    q: &Q,
    what: GenKind,
    size: usize,
    arbitrary: bool,
    dir: &Path,
) -> Outcome {
    if what == GenKind::Matrix {
        if size == 0 {
            return Err(Failure::Usage("--size must be positive".into()));
        }
        print!("{}", io::write_matrix(&g.matrix(q, size)));
        return Ok(());
    }
    let (left, right) = match what {
        GenKind::Pair if arbitrary => {
            let (a, b) = g.arbitrary_pair(q);
            (io::write_open(&a), io::write_open(&b))
        }
        GenKind::Pair => {
            let (a, b) = g.functional_pair(q);
            (io::write_open(&a), io::write_open(&b))
        }
        GenKind::GraphPair => {
            let (a, b) = g.functional_graph_pair(size.max(1));
            (io::write_graph(&a), io::write_graph(&b))
        }
        GenKind::NetPair => {
            let (a, b) = if arbitrary { g.net_pair() } else { g.functional_net_pair() };
            (io::write_net(&a), io::write_net(&b))
        }
        GenKind::Matrix => unreachable!("handled above"),
    };
    std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    write(&dir.join("left.json"), &left)?;
    write(&dir.join("right.json"), &right)?;
    println!("wrote {} and {}", dir.join("left.json").display(), dir.join("right.json").display());
    Ok(())
}
