//! Versioned text model files.
//!
//! Line oriented, tab separated, floats printed in shortest round-trip form
//! so a saved model predicts bit-for-bit like the one in memory. A full
//! predictor file carries the schema, fill statistics, encoders and
//! feature mask ahead of the boosted model:
//!
//! ```text
//! driftboost-model v1
//! schema  <label>  <positive_label>  <columns>
//! column  <name>  <ROLE>  <median>  <min_time>
//! cat  <tokens>            followed by: token  <text>  <id>  <count>
//! mvc  <tokens>            followed by: token  <text>  <count>
//! mask  <0/1 per encoded feature>
//! gbdt  <features>  <trees>
//! params  <key=value>...
//! feature  <name>  <edges>...
//! tree  <shrinkage>  <nodes>
//! split  <feature>  <threshold>  <left>  <right>  <gain>
//! leaf  <weight>
//! importances  <value>...
//! end
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use driftboost_core::encode::ColumnEncoder;
use driftboost_core::gbdt::bins::BinMapper;
use driftboost_core::gbdt::tree::{Node, Tree};
use driftboost_core::gbdt::{BoostedTree, GbdtModel, TrainParams};
use driftboost_core::pipeline::Predictor;
use driftboost_core::schema::{ColumnSpec, FeatureSchema, Role, WindowStats};
use driftboost_core::EncoderState;

use crate::error::{Error, Result};

pub const MAGIC: &str = "driftboost-model v1";

fn push_row(out: &mut String, fields: &[&dyn std::fmt::Display]) {
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push('\t');
        }
        let _ = write!(out, "{f}");
    }
    out.push('\n');
}

/// Shortest representation that parses back to the same bits.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn write_params(out: &mut String, p: &TrainParams) {
    let _ = writeln!(
        out,
        "params\tlearning_rate={}\tnum_iterations_max={}\tearly_stopping_rounds={}\treg_alpha={}\treg_lambda={}\t\
         min_split_gain={}\tmax_depth={}\tmin_child_hessian={}\tmax_bins={}\tseed={}",
        num(p.learning_rate),
        p.num_iterations_max,
        p.early_stopping_rounds,
        num(p.reg_alpha),
        num(p.reg_lambda),
        num(p.min_split_gain),
        p.max_depth,
        num(p.min_child_hessian),
        p.max_bins,
        p.seed
    );
}

fn write_gbdt_body(out: &mut String, model: &GbdtModel, params: &TrainParams) {
    push_row(out, &[&"gbdt", &model.feature_count(), &model.tree_count()]);
    write_params(out, params);
    for (name, edges) in model.feature_names().iter().zip(model.bin_mapper().edges()) {
        out.push_str("feature\t");
        out.push_str(name);
        for &e in edges {
            out.push('\t');
            out.push_str(&num(e));
        }
        out.push('\n');
    }
    for bt in model.trees() {
        push_row(out, &[&"tree", &num(bt.shrinkage), &bt.tree.nodes().len()]);
        for node in bt.tree.nodes() {
            match node {
                Node::Split { feature, threshold, left, right, gain } => {
                    push_row(out, &[&"split", feature, threshold, left, right, &num(*gain)])
                }
                Node::Leaf { weight } => push_row(out, &[&"leaf", &num(*weight)]),
            }
        }
    }
    out.push_str("importances");
    for &v in model.importances() {
        out.push('\t');
        out.push_str(&num(v));
    }
    out.push('\n');
}

/// Serializes a bare boosted model together with the parameters that built it.
pub fn write_gbdt(model: &GbdtModel, params: &TrainParams) -> String {
    let mut out = format!("{MAGIC}\n");
    write_gbdt_body(&mut out, model, params);
    out.push_str("end\n");
    out
}

pub fn write_predictor(predictor: &Predictor, params: &TrainParams) -> String {
    let mut out = format!("{MAGIC}\n");
    let schema = &predictor.schema;
    push_row(&mut out, &[&"schema", &schema.label(), &schema.positive_label(), &schema.len()]);
    for (col, spec) in schema.columns().iter().enumerate() {
        let median = num(predictor.stats.medians()[col]);
        push_row(&mut out, &[&"column", &spec.name, &spec.role, &median, &predictor.stats.min_times()[col]]);
        match &predictor.encoders.columns()[col] {
            ColumnEncoder::Cat { ordinal, counts } => {
                push_row(&mut out, &[&"cat", &ordinal.len()]);
                let mut by_id: Vec<(&String, &u32)> = ordinal.iter().collect();
                by_id.sort_by_key(|&(_, id)| *id);
                for (token, id) in by_id {
                    push_row(&mut out, &[&"token", token, id, &counts.get(token).copied().unwrap_or(0)]);
                }
            }
            ColumnEncoder::Mvc { counts } => {
                push_row(&mut out, &[&"mvc", &counts.len()]);
                for (token, count) in counts {
                    push_row(&mut out, &[&"token", token, count]);
                }
            }
            ColumnEncoder::Num | ColumnEncoder::Time => {}
        }
    }
    let mask: String = predictor.mask.iter().map(|&m| if m { '1' } else { '0' }).collect();
    push_row(&mut out, &[&"mask", &mask]);
    write_gbdt_body(&mut out, &predictor.model, params);
    out.push_str("end\n");
    out
}

pub fn save_predictor(path: &Path, predictor: &Predictor, params: &TrainParams) -> Result<()> {
    std::fs::write(path, write_predictor(predictor, params)).map_err(|e| Error::io(path, e))
}

pub fn load_predictor(path: &Path) -> Result<(Predictor, TrainParams)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_predictor(&text).map_err(|e| match e {
        Error::Model(m) => Error::Model(format!("{}: {m}", path.display())),
        other => other,
    })
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Result<Self> {
        let mut inner = text.lines().enumerate();
        match inner.next() {
            Some((_, MAGIC)) => Ok(Self { inner, line: 1 }),
            Some((_, first)) if first.starts_with("driftboost-model ") => {
                Err(Error::Model(format!("unreadable model: unsupported version {first:?}, expected {MAGIC:?}")))
            }
            _ => Err(Error::Model("unreadable model: missing driftboost-model header".into())),
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::Model(format!("unreadable model: line {}: {msg}", self.line))
    }

    /// The next line split into fields, checking its tag.
    fn expect(&mut self, tag: &str) -> Result<Vec<&'a str>> {
        let (n, line) = self.inner.next().ok_or_else(|| self.err(format!("unexpected end, expected {tag}")))?;
        self.line = n + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields[0] != tag {
            return Err(self.err(format!("expected {tag}, found {:?}", fields[0])));
        }
        Ok(fields[1..].to_vec())
    }

    fn expect_n(&mut self, tag: &str, n: usize) -> Result<Vec<&'a str>> {
        let fields = self.expect(tag)?;
        if fields.len() != n {
            return Err(self.err(format!("{tag} expects {n} fields, found {}", fields.len())));
        }
        Ok(fields)
    }

    fn parse<T: std::str::FromStr>(&self, field: &str) -> Result<T> {
        field.parse().map_err(|_| self.err(format!("cannot parse {field:?}")))
    }
}

fn read_params(lines: &mut Lines<'_>) -> Result<TrainParams> {
    let fields = lines.expect("params")?;
    let mut map = BTreeMap::new();
    for f in fields {
        let (k, v) = f.split_once('=').ok_or_else(|| lines.err(format!("bad parameter {f:?}")))?;
        map.insert(k, v);
    }
    let get = |k: &str| map.get(k).copied().ok_or_else(|| lines.err(format!("missing parameter {k}")));
    Ok(TrainParams {
        learning_rate: lines.parse(get("learning_rate")?)?,
        num_iterations_max: lines.parse(get("num_iterations_max")?)?,
        early_stopping_rounds: lines.parse(get("early_stopping_rounds")?)?,
        reg_alpha: lines.parse(get("reg_alpha")?)?,
        reg_lambda: lines.parse(get("reg_lambda")?)?,
        min_split_gain: lines.parse(get("min_split_gain")?)?,
        max_depth: lines.parse(get("max_depth")?)?,
        min_child_hessian: lines.parse(get("min_child_hessian")?)?,
        max_bins: lines.parse(get("max_bins")?)?,
        seed: lines.parse(get("seed")?)?,
    })
}

fn read_gbdt_body(lines: &mut Lines<'_>) -> Result<(GbdtModel, TrainParams)> {
    let head = lines.expect_n("gbdt", 2)?;
    let (features, tree_count): (usize, usize) = (lines.parse(head[0])?, lines.parse(head[1])?);
    let params = read_params(lines)?;
    let mut names = Vec::with_capacity(features);
    let mut edges = Vec::with_capacity(features);
    for _ in 0..features {
        let fields = lines.expect("feature")?;
        let (name, rest) = fields.split_first().ok_or_else(|| lines.err("feature without a name"))?;
        names.push(name.to_string());
        edges.push(rest.iter().map(|e| lines.parse(e)).collect::<Result<Vec<f64>>>()?);
    }
    let mapper = BinMapper::from_edges(edges).ok_or_else(|| lines.err("invalid bin edges"))?;
    let mut trees = Vec::with_capacity(tree_count);
    for _ in 0..tree_count {
        let head = lines.expect_n("tree", 2)?;
        let shrinkage: f64 = lines.parse(head[0])?;
        let count: usize = lines.parse(head[1])?;
        let mut nodes = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, line) = lines.inner.next().ok_or_else(|| lines.err("unexpected end inside a tree"))?;
            lines.line = n + 1;
            let f: Vec<&str> = line.split('\t').collect();
            nodes.push(match (f[0], f.len()) {
                ("split", 6) => Node::Split {
                    feature: lines.parse(f[1])?,
                    threshold: lines.parse(f[2])?,
                    left: lines.parse(f[3])?,
                    right: lines.parse(f[4])?,
                    gain: lines.parse(f[5])?,
                },
                ("leaf", 2) => Node::Leaf { weight: lines.parse(f[1])? },
                _ => return Err(lines.err(format!("expected a split or leaf node, found {line:?}"))),
            });
        }
        let tree = Tree::from_nodes(nodes).ok_or_else(|| lines.err("malformed tree"))?;
        trees.push(BoostedTree { tree, shrinkage });
    }
    let stored = lines.expect_n("importances", features)?;
    let stored = stored.iter().map(|v| lines.parse(v)).collect::<Result<Vec<f64>>>()?;
    let model = GbdtModel::from_parts(mapper, trees, names).map_err(|e| lines.err(e))?;
    if model.importances() != stored.as_slice() {
        return Err(lines.err("stored importances disagree with the trees"));
    }
    Ok((model, params))
}

fn expect_end(lines: &mut Lines<'_>) -> Result<()> {
    lines.expect_n("end", 0)?;
    if let Some((n, _)) = lines.inner.find(|(_, l)| !l.is_empty()) {
        lines.line = n + 1;
        return Err(lines.err("trailing content after end"));
    }
    Ok(())
}

pub fn read_gbdt(text: &str) -> Result<(GbdtModel, TrainParams)> {
    let mut lines = Lines::new(text)?;
    let out = read_gbdt_body(&mut lines)?;
    expect_end(&mut lines)?;
    Ok(out)
}

pub fn read_predictor(text: &str) -> Result<(Predictor, TrainParams)> {
    let mut lines = Lines::new(text)?;
    let head = lines.expect_n("schema", 3)?;
    let (label, positive) = (head[0], head[1]);
    let width: usize = lines.parse(head[2])?;
    let mut specs = Vec::with_capacity(width);
    let mut medians = Vec::with_capacity(width);
    let mut min_times = Vec::with_capacity(width);
    let mut encoders = Vec::with_capacity(width);
    for _ in 0..width {
        let f = lines.expect_n("column", 4)?;
        let role: Role = f[1].parse().map_err(|e| lines.err(e))?;
        specs.push(ColumnSpec::new(f[0], role));
        medians.push(lines.parse(f[2])?);
        min_times.push(lines.parse(f[3])?);
        encoders.push(match role {
            Role::Num => ColumnEncoder::Num,
            Role::Time => ColumnEncoder::Time,
            Role::Cat => {
                let head = lines.expect_n("cat", 1)?;
                let n: usize = lines.parse(head[0])?;
                let mut ordinal = BTreeMap::new();
                let mut counts = BTreeMap::new();
                for _ in 0..n {
                    let t = lines.expect_n("token", 3)?;
                    ordinal.insert(t[0].to_string(), lines.parse(t[1])?);
                    counts.insert(t[0].to_string(), lines.parse(t[2])?);
                }
                if ordinal.len() != n {
                    return Err(lines.err("repeated token"));
                }
                ColumnEncoder::Cat { ordinal, counts }
            }
            Role::Mvc => {
                let head = lines.expect_n("mvc", 1)?;
                let n: usize = lines.parse(head[0])?;
                let mut counts = BTreeMap::new();
                for _ in 0..n {
                    let t = lines.expect_n("token", 2)?;
                    counts.insert(t[0].to_string(), lines.parse(t[1])?);
                }
                if counts.len() != n {
                    return Err(lines.err("repeated token"));
                }
                ColumnEncoder::Mvc { counts }
            }
        });
    }
    let mask = lines.expect_n("mask", 1)?[0]
        .chars()
        .map(|c| match c {
            '1' => Ok(true),
            '0' => Ok(false),
            other => Err(lines.err(format!("bad mask character {other:?}"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    let (model, params) = read_gbdt_body(&mut lines)?;
    expect_end(&mut lines)?;

    let invalid = |e: driftboost_core::Error| Error::Model(format!("unreadable model: {e}"));
    let schema = FeatureSchema::new(specs, label, positive).map_err(invalid)?;
    let stats = WindowStats::from_parts(medians, min_times).map_err(invalid)?;
    let encoders = EncoderState::from_parts(&schema, encoders).map_err(invalid)?;
    let predictor = Predictor::new(schema, stats, encoders, mask, model).map_err(invalid)?;
    Ok((predictor, params))
}
