//! File formats, human-readable tables and DOT.
//!
//! All formats are JSON. Writers emit a fixed key order and one matrix row
//! per line, so identical values always serialize to identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::cospan::OpenMatrix;
use crate::error::{Error, Result};
use crate::matrix::{FiniteFunction, RMatrix, VertexSet};
use crate::netgraph::{Graph, OpenGraph, PathTable};
use crate::pathsolve::CompositionExpr;
use crate::qnet::{Marking, OpenNet, QNet, ReachRelation, Reachability, ResourceKind, Transition};
use crate::quantale::{Boolean, Capacity, Quantale, Tropical, TruncatedLanguage, Viterbi, Word, WordSet};

/// Element syntax for one instance.
pub trait Codec: Quantale {
    /// JSON literal for `e`.
    fn encode(&self, e: &Self::Elem) -> String;
    fn decode(&self, v: &Value) -> Result<Self::Elem>;
    /// Short form for tables.
    fn render(&self, e: &Self::Elem) -> String;
}

fn number(v: &Value, tag: &str) -> Result<f64> {
    let x = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.trim() {
            "inf" | "infinity" | "Infinity" | "∞" => Some(f64::INFINITY),
            t => t.parse().ok(),
        },
        _ => None,
    };
    x.ok_or_else(|| Error::Format(format!("expected a {tag} weight, found {v}")))
}

fn fmt_number(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

fn encode_number(x: f64) -> String {
    if x.is_infinite() {
        "\"inf\"".into()
    } else {
        format!("{x}")
    }
}

macro_rules! numeric_codec {
    ($t:ty) => {
        impl Codec for $t {
            fn encode(&self, e: &f64) -> String {
                encode_number(*e)
            }
            fn decode(&self, v: &Value) -> Result<f64> {
                let x = number(v, &self.tag())?;
                self.check(&x)?;
                Ok(x)
            }
            fn render(&self, e: &f64) -> String {
                fmt_number(*e)
            }
        }
    };
}

numeric_codec!(Tropical);
numeric_codec!(Capacity);
numeric_codec!(Viterbi);

impl Codec for Boolean {
    fn encode(&self, e: &bool) -> String {
        e.to_string()
    }
    fn decode(&self, v: &Value) -> Result<bool> {
        match v {
            Value::Bool(b) => Ok(*b),
            Value::Number(n) if n.as_u64() == Some(0) => Ok(false),
            Value::Number(n) if n.as_u64() == Some(1) => Ok(true),
            Value::String(s) if s == "true" || s == "false" => Ok(s == "true"),
            _ => Err(Error::Format(format!("expected a boolean weight, found {v}"))),
        }
    }
    fn render(&self, e: &bool) -> String {
        if *e { "1" } else { "0" }.into()
    }
}

impl Codec for TruncatedLanguage {
    fn encode(&self, e: &WordSet) -> String {
        let words: Vec<String> = e.iter().map(|w| quote(w.as_str())).collect();
        format!("[{}]", words.join(", "))
    }
    fn decode(&self, v: &Value) -> Result<WordSet> {
        let items = v
            .as_array()
            .ok_or_else(|| Error::Format(format!("expected an array of words, found {v}")))?;
        let words = items
            .iter()
            .map(|w| {
                w.as_str()
                    .map(Word::new)
                    .ok_or_else(|| Error::Format(format!("expected a word, found {w}")))
            })
            .collect::<Result<_>>()?;
        let set = WordSet(words);
        self.check(&set)?;
        Ok(set)
    }
    fn render(&self, e: &WordSet) -> String {
        if e.is_empty() {
            return "{}".into();
        }
        let words: Vec<&str> = e.iter().map(|w| if w.is_empty() { "ε" } else { w.as_str() }).collect();
        format!("{{{}}}", words.join(","))
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn quote_list<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    let parts: Vec<String> = items.into_iter().map(quote).collect();
    format!("[{}]", parts.join(", "))
}

/// Parses an instance tag: `tropical`, `capacity`, `viterbi`, `boolean` or
/// `language(L,letters)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Tropical,
    Capacity,
    Viterbi,
    Boolean,
    Language(TruncatedLanguage),
}

impl std::str::FromStr for Instance {
    type Err = Error;

    fn from_str(tag: &str) -> Result<Self> {
        let tag = tag.trim();
        match tag {
            "tropical" => return Ok(Instance::Tropical),
            "capacity" => return Ok(Instance::Capacity),
            "viterbi" => return Ok(Instance::Viterbi),
            "boolean" => return Ok(Instance::Boolean),
            _ => {}
        }
        let bad = || Error::Format(format!("unknown quantale tag `{tag}`"));
        let inner = tag
            .strip_prefix("language(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (len, letters) = inner.split_once(',').ok_or_else(bad)?;
        let len: usize = len.trim().parse().map_err(|_| bad())?;
        let letters: Vec<char> = letters.trim().chars().collect();
        if letters.is_empty() {
            return Err(bad());
        }
        Ok(Instance::Language(TruncatedLanguage::new(letters, len)))
    }
}

/// Dispatches on the instance of an [`AnyMatrix`], [`AnyOpen`] or
/// [`AnyExpr`], binding the inner value and its quantale.
#[macro_export]
macro_rules! dispatch {
    ($kind:ident, $any:expr, $v:ident => $body:expr) => {
        match $any {
            $crate::io::$kind::Tropical($v) => $body,
            $crate::io::$kind::Capacity($v) => $body,
            $crate::io::$kind::Viterbi($v) => $body,
            $crate::io::$kind::Boolean($v) => $body,
            $crate::io::$kind::Language($v) => $body,
        }
    };
}

/// Dispatches on two values that must share an instance.
#[macro_export]
macro_rules! dispatch2 {
    ($kind:ident, $a:expr, $b:expr, ($x:ident, $y:ident) => $body:expr) => {
        match ($a, $b) {
            ($crate::io::$kind::Tropical($x), $crate::io::$kind::Tropical($y)) => $body,
            ($crate::io::$kind::Capacity($x), $crate::io::$kind::Capacity($y)) => $body,
            ($crate::io::$kind::Viterbi($x), $crate::io::$kind::Viterbi($y)) => $body,
            ($crate::io::$kind::Boolean($x), $crate::io::$kind::Boolean($y)) => $body,
            ($crate::io::$kind::Language($x), $crate::io::$kind::Language($y)) => $body,
            (a, b) => Err($crate::Error::InstanceMismatch {
                left: a.tag(),
                right: b.tag(),
            }
            .into()),
        }
    };
}

macro_rules! any_enum {
    ($name:ident, $inner:ident) => {
        #[derive(Debug, Clone)]
        pub enum $name {
            Tropical($inner<Tropical>),
            Capacity($inner<Capacity>),
            Viterbi($inner<Viterbi>),
            Boolean($inner<Boolean>),
            Language($inner<TruncatedLanguage>),
        }
    };
}

any_enum!(AnyMatrix, RMatrix);
any_enum!(AnyOpen, OpenMatrix);
any_enum!(AnyExpr, CompositionExpr);

impl AnyMatrix {
    pub fn tag(&self) -> String {
        dispatch!(AnyMatrix, self, m => m.quantale().tag())
    }
}

impl AnyOpen {
    pub fn tag(&self) -> String {
        dispatch!(AnyOpen, self, m => m.quantale().tag())
    }
}

impl AnyExpr {
    pub fn tag(&self) -> String {
        fn first<Q: Quantale>(e: &CompositionExpr<Q>) -> String {
            match e {
                CompositionExpr::Leaf(m) => m.quantale().tag(),
                CompositionExpr::Compose(a, _) | CompositionExpr::Tensor(a, _) => first(a),
            }
        }
        dispatch!(AnyExpr, self, e => first(e))
    }
}

fn parse_json(text: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(text)? {
        Value::Object(m) => Ok(m),
        _ => Err(Error::parse_at(1, 1, "expected a JSON object")),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Format(format!("missing field `{key}`")))
}

fn labels(v: &Value, what: &str) -> Result<VertexSet> {
    let items = v
        .as_array()
        .ok_or_else(|| Error::Format(format!("`{what}` must be an array of labels")))?;
    let strs = items
        .iter()
        .map(|x| match x {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(Error::Format(format!("`{what}` holds a non-label {x}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    VertexSet::new(strs)
}

fn leg(obj: &Map<String, Value>, key: &str, dom: &VertexSet, cod: &VertexSet) -> Result<FiniteFunction> {
    let Some(v) = obj.get(key) else {
        // without an explicit leg, boundary labels name carrier labels
        let pairs: Vec<(&str, &str)> = dom.iter().map(|x| (x, x)).collect();
        return FiniteFunction::from_pairs(dom.clone(), cod.clone(), &pairs);
    };
    let map = v
        .as_object()
        .ok_or_else(|| Error::Format(format!("`{key}` must map boundary labels to carrier labels")))?;
    let pairs = map
        .iter()
        .map(|(k, t)| {
            t.as_str()
                .map(|t| (k.as_str(), t))
                .ok_or_else(|| Error::Format(format!("`{key}.{k}` must be a label")))
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteFunction::from_pairs(dom.clone(), cod.clone(), &pairs)
}

fn boundary(obj: &Map<String, Value>, key: &str) -> Result<VertexSet> {
    obj.get(key).map_or(Ok(VertexSet::empty()), |v| labels(v, key))
}

fn decode_matrix<Q: Codec>(q: Q, obj: &Map<String, Value>) -> Result<RMatrix<Q>> {
    let (rows, cols) = match obj.get("vertices") {
        Some(v) => {
            let vs = labels(v, "vertices")?;
            (vs.clone(), vs)
        }
        None => (labels(field(obj, "rows")?, "rows")?, labels(field(obj, "cols")?, "cols")?),
    };
    let data = field(obj, "entries")?
        .as_array()
        .ok_or_else(|| Error::Format("`entries` must be an array of rows".into()))?;
    let parsed = data
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::Format("each entry row must be an array".into()))?
                .iter()
                .map(|e| q.decode(e))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RMatrix::from_rows(q, rows, cols, parsed)
}

fn instance(obj: &Map<String, Value>) -> Result<Instance> {
    field(obj, "quantale")?
        .as_str()
        .ok_or_else(|| Error::Format("`quantale` must be a tag string".into()))?
        .parse()
}

macro_rules! by_instance {
    ($inst:expr, $any:ident, |$q:ident| $body:expr) => {
        match $inst {
            Instance::Tropical => {
                let $q = Tropical;
                $any::Tropical($body)
            }
            Instance::Capacity => {
                let $q = Capacity;
                $any::Capacity($body)
            }
            Instance::Viterbi => {
                let $q = Viterbi;
                $any::Viterbi($body)
            }
            Instance::Boolean => {
                let $q = Boolean;
                $any::Boolean($body)
            }
            Instance::Language(l) => {
                let $q = l;
                $any::Language($body)
            }
        }
    };
}

pub fn parse_matrix(text: &str) -> Result<AnyMatrix> {
    let obj = parse_json(text)?;
    Ok(by_instance!(instance(&obj)?, AnyMatrix, |q| decode_matrix(q, &obj)?))
}

fn decode_open<Q: Codec>(q: Q, obj: &Map<String, Value>) -> Result<OpenMatrix<Q>> {
    let mat = decode_matrix(q, obj)?;
    let (x, y) = (boundary(obj, "inputs")?, boundary(obj, "outputs")?);
    let li = leg(obj, "leg_in", &x, mat.rows())?;
    let lo = leg(obj, "leg_out", &y, mat.rows())?;
    OpenMatrix::new(li, lo, mat)
}

/// Parses an open matrix; a plain matrix file gives empty boundaries.
pub fn parse_open(text: &str) -> Result<AnyOpen> {
    let obj = parse_json(text)?;
    Ok(by_instance!(instance(&obj)?, AnyOpen, |q| decode_open(q, &obj)?))
}

fn write_entries<Q: Codec>(out: &mut String, m: &RMatrix<Q>) {
    let q = m.quantale();
    if m.rows() == m.cols() {
        let _ = writeln!(out, "  \"vertices\": {},", quote_list(m.rows().iter()));
    } else {
        let _ = writeln!(out, "  \"rows\": {},", quote_list(m.rows().iter()));
        let _ = writeln!(out, "  \"cols\": {},", quote_list(m.cols().iter()));
    }
    out.push_str("  \"entries\": [");
    for i in 0..m.rows().len() {
        let row: Vec<String> = (0..m.cols().len()).map(|j| q.encode(m.get(i, j))).collect();
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        let _ = write!(out, "    [{}]", row.join(", "));
    }
    out.push_str(if m.rows().is_empty() { "]" } else { "\n  ]" });
}

/// Canonical matrix file. Square matrices use `vertices`, rectangular ones
/// `rows` and `cols`.
pub fn write_matrix<Q: Codec>(m: &RMatrix<Q>) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"quantale\": {},", quote(&m.quantale().tag()));
    write_entries(&mut out, m);
    out.push_str("\n}\n");
    out
}

fn write_leg(f: &FiniteFunction) -> String {
    let pairs: Vec<String> = f
        .label_pairs()
        .into_iter()
        .map(|(x, y)| format!("{}: {}", quote(&x), quote(&y)))
        .collect();
    format!("{{{}}}", pairs.join(", "))
}

fn write_legs(out: &mut String, li: &FiniteFunction, lo: &FiniteFunction) {
    let _ = writeln!(out, ",\n  \"inputs\": {},", quote_list(li.domain().iter()));
    let _ = writeln!(out, "  \"outputs\": {},", quote_list(lo.domain().iter()));
    let _ = writeln!(out, "  \"leg_in\": {},", write_leg(li));
    let _ = write!(out, "  \"leg_out\": {}", write_leg(lo));
}

pub fn write_open<Q: Codec>(m: &OpenMatrix<Q>) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"quantale\": {},", quote(&m.quantale().tag()));
    write_entries(&mut out, m.matrix());
    write_legs(&mut out, m.leg_in(), m.leg_out());
    out.push_str("\n}\n");
    out
}

/// Aligned table with row and column labels.
pub fn render_table<Q: Codec>(m: &RMatrix<Q>) -> String {
    let q = m.quantale();
    let cells: Vec<Vec<String>> = (0..m.rows().len())
        .map(|i| (0..m.cols().len()).map(|j| q.render(m.get(i, j))).collect())
        .collect();
    let head = m.rows().iter().map(str::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..m.cols().len())
        .map(|j| {
            cells
                .iter()
                .map(|r| r[j].chars().count())
                .chain(std::iter::once(m.cols().label(j).chars().count()))
                .max()
                .unwrap_or(1)
        })
        .collect();
    let mut out = format!("{:head$}", "");
    for (j, w) in widths.iter().enumerate() {
        let _ = write!(out, "  {:>w$}", m.cols().label(j));
    }
    out.push('\n');
    for (i, row) in cells.iter().enumerate() {
        let _ = write!(out, "{:<head$}", m.rows().label(i));
        for (c, w) in row.iter().zip(&widths) {
            let pad = w - c.chars().count();
            let _ = write!(out, "  {}{}", " ".repeat(pad), c);
        }
        out.push('\n');
    }
    out
}

/// Loads an expression file. Leaves name open-matrix files relative to the
/// expression file; all leaves must share one instance.
pub fn load_expr(path: &Path) -> Result<AnyExpr> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    expr_node(&v, base)
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))
}

fn expr_node(v: &Value, base: &Path) -> Result<AnyExpr> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Format("expression nodes must be objects".into()))?;
    let op = field(obj, "op")?.as_str().unwrap_or_default();
    match op {
        "leaf" => {
            let rel = field(obj, "path")?
                .as_str()
                .ok_or_else(|| Error::Format("`path` must be a string".into()))?;
            let leaf = parse_open(&read(&base.join(rel))?)?;
            Ok(dispatch!(AnyOpen, leaf, m => wrap_leaf(m)))
        }
        "compose" | "tensor" => {
            let l = expr_node(field(obj, "left")?, base)?;
            let r = expr_node(field(obj, "right")?, base)?;
            let tensor = op == "tensor";
            dispatch2!(AnyExpr, l, r, (a, b) => Ok(join_expr(a, b, tensor)))
        }
        other => Err(Error::Format(format!("unknown expression op `{other}`"))),
    }
}

/// Wraps a typed value back into its `Any*` variant.
pub trait IntoAny: Sized {
    type Any;
    fn into_any(self) -> Self::Any;
}

macro_rules! into_any {
    ($inner:ident, $any:ident) => {
        impl IntoAny for $inner<Tropical> {
            type Any = $any;
            fn into_any(self) -> $any {
                $any::Tropical(self)
            }
        }
        impl IntoAny for $inner<Capacity> {
            type Any = $any;
            fn into_any(self) -> $any {
                $any::Capacity(self)
            }
        }
        impl IntoAny for $inner<Viterbi> {
            type Any = $any;
            fn into_any(self) -> $any {
                $any::Viterbi(self)
            }
        }
        impl IntoAny for $inner<Boolean> {
            type Any = $any;
            fn into_any(self) -> $any {
                $any::Boolean(self)
            }
        }
        impl IntoAny for $inner<TruncatedLanguage> {
            type Any = $any;
            fn into_any(self) -> $any {
                $any::Language(self)
            }
        }
    };
}

into_any!(RMatrix, AnyMatrix);
into_any!(OpenMatrix, AnyOpen);
into_any!(CompositionExpr, AnyExpr);

fn wrap_leaf<Q: Quantale>(m: OpenMatrix<Q>) -> AnyExpr
where
    CompositionExpr<Q>: IntoAny<Any = AnyExpr>,
{
    CompositionExpr::leaf(m).into_any()
}

fn join_expr<Q: Quantale>(a: CompositionExpr<Q>, b: CompositionExpr<Q>, tensor: bool) -> AnyExpr
where
    CompositionExpr<Q>: IntoAny<Any = AnyExpr>,
{
    if tensor { a.tensor(b) } else { a.compose(b) }.into_any()
}

// ---- graphs ----

pub fn parse_graph(text: &str) -> Result<OpenGraph> {
    let obj = parse_json(text)?;
    let vs = labels(field(&obj, "vertices")?, "vertices")?;
    let edges = match obj.get("edges") {
        None => Vec::new(),
        Some(v) => v
            .as_array()
            .ok_or_else(|| Error::Format("`edges` must be an array".into()))?
            .iter()
            .map(|e| {
                let parts: Option<Vec<&str>> = e.as_array().and_then(|a| a.iter().map(Value::as_str).collect());
                match parts.as_deref() {
                    Some([id, s, t]) => Ok((id.to_string(), s.to_string(), t.to_string())),
                    _ => Err(Error::Format(format!("edges are [id, src, tgt] triples, found {e}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let refs: Vec<(&str, &str, &str)> = edges.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    let g = Graph::from_labels(vs, &refs)?;
    let (x, y) = (boundary(&obj, "inputs")?, boundary(&obj, "outputs")?);
    let li = leg(&obj, "leg_in", &x, g.vertices())?;
    let lo = leg(&obj, "leg_out", &y, g.vertices())?;
    OpenGraph::new(g, li, lo)
}

pub fn write_graph(c: &OpenGraph) -> String {
    let g = c.graph();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"vertices\": {},", quote_list(g.vertices().iter()));
    out.push_str("  \"edges\": [");
    for (k, e) in g.edges().iter().enumerate() {
        out.push_str(if k == 0 { "\n" } else { ",\n" });
        let _ = write!(
            out,
            "    [{}, {}, {}]",
            quote(&e.id),
            quote(g.vertices().label(e.src)),
            quote(g.vertices().label(e.tgt))
        );
    }
    out.push_str(if g.edges().is_empty() { "]" } else { "\n  ]" });
    write_legs(&mut out, c.leg_in(), c.leg_out());
    out.push_str("\n}\n");
    out
}

pub fn write_path_table(t: &PathTable) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"rows\": {},", quote_list(t.rows().iter()));
    let _ = writeln!(out, "  \"cols\": {},", quote_list(t.cols().iter()));
    let _ = writeln!(out, "  \"bound\": {},", t.bound());
    out.push_str("  \"cells\": [");
    let mut first = true;
    for i in 0..t.rows().len() {
        for j in 0..t.cols().len() {
            let paths: Vec<String> = t.get(i, j).iter().map(|p| quote_list(p.edges.iter().map(String::as_str))).collect();
            out.push_str(if first { "\n" } else { ",\n" });
            first = false;
            let _ = write!(
                out,
                "    {{\"from\": {}, \"to\": {}, \"paths\": [{}]}}",
                quote(t.rows().label(i)),
                quote(t.cols().label(j)),
                paths.join(", ")
            );
        }
    }
    out.push_str(if first { "]" } else { "\n  ]" });
    out.push_str("\n}\n");
    out
}

pub fn render_path_table(t: &PathTable) -> String {
    let mut out = String::new();
    for i in 0..t.rows().len() {
        for j in 0..t.cols().len() {
            let cell = t.get(i, j);
            let paths: Vec<String> = cell.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                out,
                "{} -> {}: {} [{}]",
                t.rows().label(i),
                t.cols().label(j),
                cell.len(),
                paths.join(", ")
            );
        }
    }
    out
}

// ---- DOT ----

fn dot_id(s: &str) -> String {
    quote(s)
}

/// One edge per non-bottom entry, labeled with its weight.
pub fn matrix_to_dot<Q: Codec>(m: &RMatrix<Q>) -> String {
    let q = m.quantale();
    let mut out = String::from("digraph G {\n");
    for i in 0..m.rows().len() {
        for j in 0..m.cols().len() {
            if !m.is_bottom_at(i, j) {
                let _ = writeln!(
                    out,
                    "  {} -> {} [label={}];",
                    dot_id(m.rows().label(i)),
                    dot_id(m.cols().label(j)),
                    quote(&q.render(m.get(i, j)))
                );
            }
        }
    }
    out.push_str("}\n");
    out
}

/// One edge statement per edge, labeled with its id.
pub fn graph_to_dot(g: &Graph) -> String {
    let mut out = String::from("digraph G {\n");
    for e in g.edges() {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            dot_id(g.vertices().label(e.src)),
            dot_id(g.vertices().label(e.tgt)),
            quote(&e.id)
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Arrow,
    Sym(char),
}

fn dot_tokens(text: &str) -> Result<Vec<(Tok, usize, usize)>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |c: char, line: &mut usize, col: &mut usize| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c.is_whitespace() {
            advance(c, &mut line, &mut col);
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') || c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(chars[i], &mut line, &mut col);
                i += 1;
            }
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push((Tok::Arrow, l0, c0));
            col += 2;
            i += 2;
        } else if "{}[];,=".contains(c) {
            out.push((Tok::Sym(c), l0, c0));
            col += 1;
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            advance(c, &mut line, &mut col);
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(Error::parse_at(l0, c0, "unterminated string")),
                    Some('"') => {
                        advance('"', &mut line, &mut col);
                        i += 1;
                        break;
                    }
                    Some('\\') if i + 1 < chars.len() => {
                        s.push(chars[i + 1]);
                        col += 2;
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance(ch, &mut line, &mut col);
                        i += 1;
                    }
                }
            }
            out.push((Tok::Id(s), l0, c0));
        } else if c.is_alphanumeric() || c == '_' || c == '.' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                s.push(chars[i]);
                col += 1;
                i += 1;
            }
            out.push((Tok::Id(s), l0, c0));
        } else {
            return Err(Error::parse_at(l0, c0, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// Reads node and edge statements of a `digraph`. Edges take their id from
/// a `label` attribute, else `e0, e1, ...`; vertices appear in order of
/// first mention.
pub fn parse_dot(text: &str) -> Result<Graph> {
    let toks = dot_tokens(text)?;
    let mut pos = 0;
    let at = |pos: usize| toks.get(pos).map_or((0, 0), |t| (t.1, t.2));
    let err = |pos: usize, msg: &str| {
        let (l, c) = at(pos);
        Error::parse_at(l, c, msg)
    };
    if !matches!(toks.get(pos), Some((Tok::Id(s), ..)) if s == "digraph") {
        return Err(err(pos, "expected `digraph`"));
    }
    pos += 1;
    if matches!(toks.get(pos), Some((Tok::Id(_), ..))) {
        pos += 1;
    }
    if toks.get(pos).map(|t| &t.0) != Some(&Tok::Sym('{')) {
        return Err(err(pos, "expected `{`"));
    }
    pos += 1;
    let mut vertices: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String, String)> = Vec::new();
    let mention = |v: &str, vertices: &mut Vec<String>| {
        if !vertices.iter().any(|x| x == v) {
            vertices.push(v.to_string());
        }
    };
    loop {
        match toks.get(pos).map(|t| &t.0) {
            None => return Err(err(pos.saturating_sub(1), "missing `}`")),
            Some(Tok::Sym('}')) => break,
            Some(Tok::Sym(';')) => pos += 1,
            Some(Tok::Id(first)) => {
                let mut chain = vec![first.clone()];
                pos += 1;
                while toks.get(pos).map(|t| &t.0) == Some(&Tok::Arrow) {
                    match toks.get(pos + 1).map(|t| &t.0) {
                        Some(Tok::Id(v)) => chain.push(v.clone()),
                        _ => return Err(err(pos + 1, "expected a node after `->`")),
                    }
                    pos += 2;
                }
                let mut attrs = BTreeMap::new();
                if toks.get(pos).map(|t| &t.0) == Some(&Tok::Sym('[')) {
                    pos += 1;
                    loop {
                        match toks.get(pos).map(|t| &t.0) {
                            Some(Tok::Sym(']')) => {
                                pos += 1;
                                break;
                            }
                            Some(Tok::Sym(',')) | Some(Tok::Sym(';')) => pos += 1,
                            Some(Tok::Id(k)) => {
                                if toks.get(pos + 1).map(|t| &t.0) != Some(&Tok::Sym('=')) {
                                    return Err(err(pos + 1, "expected `=` in attribute"));
                                }
                                let Some(Tok::Id(v)) = toks.get(pos + 2).map(|t| &t.0) else {
                                    return Err(err(pos + 2, "expected an attribute value"));
                                };
                                attrs.insert(k.clone(), v.clone());
                                pos += 3;
                            }
                            _ => return Err(err(pos, "unterminated attribute list")),
                        }
                    }
                }
                if matches!(first.as_str(), "graph" | "node" | "edge") && chain.len() == 1 {
                    continue;
                }
                for v in &chain {
                    mention(v, &mut vertices);
                }
                for w in chain.windows(2) {
                    let id = match attrs.get("label") {
                        Some(l) if chain.len() == 2 => l.clone(),
                        Some(l) => format!("{l}{}", edges.len()),
                        None => format!("e{}", edges.len()),
                    };
                    edges.push((id, w[0].clone(), w[1].clone()));
                }
            }
            Some(_) => return Err(err(pos, "expected a statement")),
        }
    }
    let vs = VertexSet::new(vertices)?;
    let refs: Vec<(&str, &str, &str)> = edges.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    Graph::from_labels(vs, &refs)
}

// ---- nets ----

fn decode_marking(kind: ResourceKind, places: &VertexSet, v: &Value) -> Result<Marking> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Format(format!("markings are {{place: coefficient}} objects, found {v}")))?;
    let pairs = obj
        .iter()
        .map(|(p, c)| {
            c.as_i64()
                .map(|c| (p.as_str(), c))
                .ok_or_else(|| Error::Format(format!("coefficient of `{p}` must be an integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    Marking::from_labels(kind, places, &pairs)
}

/// Reads a marking given as JSON (`{"p": 2}`) or as a sum (`2*p + q`, or `0`).
pub fn parse_marking(net: &QNet, text: &str) -> Result<Marking> {
    let text = text.trim();
    if text.starts_with('{') {
        let v: Value = serde_json::from_str(text)?;
        return decode_marking(net.kind(), net.places(), &v);
    }
    if text == "0" || text.is_empty() {
        return Ok(Marking::zero(net.places().len()));
    }
    let mut pairs = Vec::new();
    for term in text.split('+') {
        let term = term.trim();
        let (c, p) = match term.split_once('*') {
            Some((c, p)) => (
                c.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Format(format!("bad coefficient in `{term}`")))?,
                p.trim(),
            ),
            None => (1, term),
        };
        pairs.push((p, c));
    }
    net.marking(&pairs)
}

fn encode_marking(m: &Marking, places: &VertexSet) -> String {
    let parts: Vec<String> = m.support(places).map(|(p, c)| format!("{}: {c}", quote(p))).collect();
    format!("{{{}}}", parts.join(", "))
}

pub fn parse_net(text: &str) -> Result<OpenNet> {
    let obj = parse_json(text)?;
    let kind: ResourceKind = field(&obj, "kind")?
        .as_str()
        .ok_or_else(|| Error::Format("`kind` must be a string".into()))?
        .parse()?;
    let places = labels(field(&obj, "places")?, "places")?;
    let ts = match obj.get("transitions") {
        None => Vec::new(),
        Some(v) => v
            .as_array()
            .ok_or_else(|| Error::Format("`transitions` must be an array".into()))?
            .iter()
            .map(|t| {
                let t = t
                    .as_object()
                    .ok_or_else(|| Error::Format("transitions are objects".into()))?;
                let id = field(t, "id")?
                    .as_str()
                    .ok_or_else(|| Error::Format("transition `id` must be a string".into()))?;
                let empty = Value::Object(Map::new());
                Ok(Transition {
                    id: id.to_string(),
                    src: decode_marking(kind, &places, t.get("src").unwrap_or(&empty))?,
                    tgt: decode_marking(kind, &places, t.get("tgt").unwrap_or(&empty))?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let net = QNet::new(kind, places, ts)?;
    let (x, y) = (boundary(&obj, "inputs")?, boundary(&obj, "outputs")?);
    let li = leg(&obj, "leg_in", &x, net.places())?;
    let lo = leg(&obj, "leg_out", &y, net.places())?;
    OpenNet::new(net, li, lo)
}

pub fn write_net(p: &OpenNet) -> String {
    let net = p.net();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"kind\": {},", quote(&net.kind().to_string()));
    let _ = writeln!(out, "  \"places\": {},", quote_list(net.places().iter()));
    out.push_str("  \"transitions\": [");
    for (k, t) in net.transitions().iter().enumerate() {
        out.push_str(if k == 0 { "\n" } else { ",\n" });
        let _ = write!(
            out,
            "    {{\"id\": {}, \"src\": {}, \"tgt\": {}}}",
            quote(&t.id),
            encode_marking(&t.src, net.places()),
            encode_marking(&t.tgt, net.places())
        );
    }
    out.push_str(if net.transitions().is_empty() { "]" } else { "\n  ]" });
    write_legs(&mut out, p.leg_in(), p.leg_out());
    out.push_str("\n}\n");
    out
}

pub fn write_markings(net: &QNet, ms: &[Marking]) -> String {
    let items: Vec<String> = ms.iter().map(|m| format!("  {}", encode_marking(m, net.places()))).collect();
    if items.is_empty() {
        "[]\n".into()
    } else {
        format!("[\n{}\n]\n", items.join(",\n"))
    }
}

pub fn write_reachability(net: &QNet, r: &Reachability) -> String {
    let mut out = String::from("{\n  \"markings\": [");
    for (k, (m, w)) in r.markings.iter().enumerate() {
        out.push_str(if k == 0 { "\n" } else { ",\n" });
        let steps: Vec<&str> = w.steps.iter().map(|s| s.0.as_str()).collect();
        let _ = write!(
            out,
            "    {{\"marking\": {}, \"witness\": {}}}",
            encode_marking(m, net.places()),
            quote_list(steps)
        );
    }
    out.push_str(if r.markings.is_empty() { "]" } else { "\n  ]" });
    let _ = write!(out, ",\n  \"pruned\": {}\n}}\n", r.pruned);
    out
}

pub fn render_reachability(net: &QNet, r: &Reachability) -> String {
    let mut out = String::new();
    for (m, w) in &r.markings {
        let steps: Vec<&str> = w.steps.iter().map(|s| s.0.as_str()).collect();
        let via = if steps.is_empty() { "(initial)".to_string() } else { steps.join(" ; ") };
        let _ = writeln!(out, "{}  via {}", m.display(net.places()), via);
    }
    if r.pruned > 0 {
        let _ = writeln!(out, "{} markings pruned by the coefficient cap", r.pruned);
    }
    out
}

pub fn write_relation(r: &ReachRelation) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"inputs\": {},", quote_list(r.inputs.iter()));
    let _ = writeln!(out, "  \"outputs\": {},", quote_list(r.outputs.iter()));
    let _ = writeln!(out, "  \"depth\": {},", r.depth);
    out.push_str("  \"pairs\": [");
    for (k, ((x, y), c)) in r.pairs.iter().enumerate() {
        out.push_str(if k == 0 { "\n" } else { ",\n" });
        let counts: Vec<String> = c.iter().map(u64::to_string).collect();
        let _ = write!(
            out,
            "    {{\"x\": {}, \"y\": {}, \"counts\": [{}]}}",
            encode_marking(x, &r.inputs),
            encode_marking(y, &r.outputs),
            counts.join(", ")
        );
    }
    out.push_str(if r.pairs.is_empty() { "]" } else { "\n  ]" });
    out.push_str("\n}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const COMPOSITE: &str = r#"{
  "quantale": "tropical",
  "vertices": ["a", "b", "c~d", "e"],
  "entries": [
    [1, 2, 0.1, "inf"],
    [3, 0, 0.2, "inf"],
    ["inf", 1, 0.2, "inf"],
    ["inf", "inf", 0, 9]
  ],
  "inputs": ["1", "2"],
  "outputs": ["4"],
  "leg_in": {"1": "a", "2": "b"},
  "leg_out": {"4": "e"}
}
"#;

    #[test]
    fn open_matrix_round_trip_is_byte_exact() {
        let m = parse_open(COMPOSITE).unwrap();
        let AnyOpen::Tropical(m) = m else { panic!("wrong instance") };
        assert_eq!(m.matrix().get_by_label("c~d", "e").unwrap(), &f64::INFINITY);
        assert_eq!(write_open(&m), COMPOSITE);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = parse_matrix("{\n  \"quantale\": \"tropical\",\n  \"vertices\": [\"a\"\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e:?}");
        assert!(parse_matrix(r#"{"quantale": "tropical", "vertices": ["a"], "entries": [[-1]]}"#).is_err());
        assert!(parse_matrix(r#"{"quantale": "nope", "vertices": [], "entries": []}"#).is_err());
    }

    #[test]
    fn instance_tags() {
        for tag in ["tropical", "capacity", "viterbi", "boolean", "language(2,ab)"] {
            let text = format!(r#"{{"quantale": "{tag}", "vertices": ["a"], "entries": [[{}]]}}"#, match tag {
                "boolean" => "true",
                t if t.starts_with("language") => "[\"\", \"ab\"]",
                _ => "1",
            });
            let m = parse_matrix(&text).unwrap();
            assert_eq!(m.tag(), tag);
            let again = dispatch!(AnyMatrix, &m, x => write_matrix(x));
            let back = parse_matrix(&again).unwrap();
            assert_eq!(dispatch!(AnyMatrix, &back, x => write_matrix(x)), again);
        }
    }

    #[test]
    fn table_aligns_columns() {
        let AnyMatrix::Tropical(m) = parse_matrix(COMPOSITE).unwrap() else { panic!() };
        let t = render_table(&m);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
        assert!(lines[1].contains("inf"));
    }

    #[test]
    fn dot_round_trip() {
        let g = Graph::from_labels(
            VertexSet::new(["u", "v w"]).unwrap(),
            &[("e1", "u", "v w"), ("e2", "v w", "v w")],
        )
        .unwrap();
        let dot = graph_to_dot(&g);
        assert_eq!(parse_dot(&dot).unwrap(), g);
        assert_eq!(graph_to_dot(&Graph::edgeless(VertexSet::numbered("v", 3))), "digraph G {\n}\n");
        let chain = parse_dot("digraph { a; a -> b -> c [color=red]\n // note\n}").unwrap();
        assert_eq!(chain.edges().len(), 2);
        assert!(matches!(parse_dot("digraph { a -> }"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn net_round_trip_and_markings() {
        let text = r#"{
  "kind": "natural",
  "places": ["p1", "p2", "p3"],
  "transitions": [
    {"id": "t1", "src": {"p1": 1, "p2": 1}, "tgt": {"p3": 1}},
    {"id": "t2", "src": {"p3": 1}, "tgt": {"p2": 2}}
  ],
  "inputs": [],
  "outputs": [],
  "leg_in": {},
  "leg_out": {}
}
"#;
        let p = parse_net(text).unwrap();
        assert_eq!(write_net(&p), text);
        let m = parse_marking(p.net(), "p1 + p2").unwrap();
        assert_eq!(m, parse_marking(p.net(), r#"{"p1": 1, "p2": 1}"#).unwrap());
        assert_eq!(parse_marking(p.net(), "2*p2").unwrap().display(p.net().places()), "2p2");
        assert!(parse_marking(p.net(), "q").is_err());
    }

    #[test]
    fn graph_file_round_trip() {
        let text = r#"{
  "vertices": ["v0", "v1"],
  "edges": [
    ["g1", "v0", "v1"]
  ],
  "inputs": ["a"],
  "outputs": ["b"],
  "leg_in": {"a": "v0"},
  "leg_out": {"b": "v1"}
}
"#;
        let g = parse_graph(text).unwrap();
        assert_eq!(write_graph(&g), text);
    }
}
