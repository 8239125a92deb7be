//! Model files.
//!
//! ```text
//! #method=A	iterations=7	converged=true	links_total=5210
//! #aux	class=global	lambda_plus=0.83	lambda_minus=0.0021	lambda=0.19	tau=0.22
//! u	v	trans_joint	trans_v_given_u	trans_u_given_v	like
//! house	maison	0.0012	0.93	0.97	-3.1
//! the	-	0.0004	0.11	na	-5.2
//! ```
//!
//! NULL is written `-`; a real word spelled `-` is written `\-`, and a real
//! word starting with `\` gets one more. Missing values are `na`. Numbers
//! use the shortest decimal form that parses back to the same `f64`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::corpus::Side;
use crate::error::{Error, Result};
use crate::estimation::{AuxParams, Conditional, LinkClassKey, Method, TranslationModel};
use crate::linking::LikelihoodTable;
use crate::vocab::{Vocab, WordId, NULL_MARKER};

pub const COLUMNS: [&str; 6] = [
    "u",
    "v",
    "trans_joint",
    "trans_v_given_u",
    "trans_u_given_v",
    "like",
];

const NA: &str = "na";

/// Everything in a model file besides the probability tables.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelHeader {
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    pub links_total: f64,
    /// Global noise parameters first, then per link class (Methods B, C).
    pub aux: Vec<AuxParams>,
}

/// A model as read back from disk, with vocabularies built from the words
/// the file mentions.
#[derive(Clone, Debug)]
pub struct ModelFile {
    pub header: ModelHeader,
    pub model: TranslationModel,
    pub like: LikelihoodTable,
}

fn escape(word: &str) -> String {
    if word == NULL_MARKER || word.starts_with('\\') {
        format!("\\{word}")
    } else {
        word.to_string()
    }
}

fn word_field(vocab: &Vocab, id: WordId) -> String {
    if id.is_null() {
        NULL_MARKER.to_string()
    } else {
        escape(vocab.word(id))
    }
}

/// `None` for NULL.
fn parse_word(field: &str) -> Option<String> {
    if field == NULL_MARKER {
        None
    } else if let Some(rest) = field.strip_prefix('\\') {
        Some(rest.to_string())
    } else {
        Some(field.to_string())
    }
}

fn num(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), |x| x.to_string())
}

fn aux_line(p: &AuxParams) -> String {
    let class = p
        .link_class
        .map_or_else(|| "global".to_string(), |k| k.to_string());
    format!(
        "#aux\tclass={class}\tlambda_plus={}\tlambda_minus={}\tlambda={}\ttau={}\n",
        p.lambda_plus, p.lambda_minus, p.lambda, p.tau
    )
}

/// Renders `model` with its header and the likelihood of each pair. Rows
/// are sorted by `(u, v)` id, which is lexicographic with NULL last.
pub fn write_model_string(model: &TranslationModel, header: &ModelHeader, like: &LikelihoodTable) -> String {
    let mut out = format!(
        "#method={}\titerations={}\tconverged={}\tlinks_total={}\n",
        header.method, header.iterations, header.converged, header.links_total
    );
    for p in &header.aux {
        out.push_str(&aux_line(p));
    }
    out.push_str(&COLUMNS.join("\t"));
    out.push('\n');
    let (src, tgt) = (model.src_vocab(), model.tgt_vocab());
    let joint = model.has_joint();
    let cond_fwd = model.conditional(Side::Src);
    let cond_bwd = model.conditional(Side::Tgt);
    let present = |c: &Conditional, g: WordId, p: WordId| {
        let d = c.dist(g);
        d.binary_search_by_key(&p, |&(w, _)| w).ok().map(|i| d[i].1)
    };
    for (u, v) in model.pairs() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            word_field(src, u),
            word_field(tgt, v),
            num(joint.then(|| model.joint(u, v))),
            num(present(cond_fwd, u, v)),
            num(present(cond_bwd, v, u)),
            num(like.get(u, v)),
        ));
    }
    out
}

pub fn write_model(
    path: &Path,
    model: &TranslationModel,
    header: &ModelHeader,
    like: &LikelihoodTable,
) -> Result<()> {
    std::fs::write(path, write_model_string(model, header, like)).map_err(|e| Error::io(path, e))
}

fn parse_f64(origin: &str, line: usize, field: &str, what: &str) -> Result<Option<f64>> {
    if field == NA {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::format(origin, line, format!("{what}: not a number: {field:?}")))
}

fn key_values<'a>(
    origin: &str,
    line: usize,
    fields: impl Iterator<Item = &'a str>,
) -> Result<BTreeMap<&'a str, &'a str>> {
    fields
        .map(|f| {
            f.split_once('=')
                .ok_or_else(|| Error::format(origin, line, format!("expected key=value, got {f:?}")))
        })
        .collect()
}

fn required<'a>(kv: &BTreeMap<&str, &'a str>, key: &str, origin: &str, line: usize) -> Result<&'a str> {
    kv.get(key)
        .copied()
        .ok_or_else(|| Error::format(origin, line, format!("header lacks {key}")))
}

fn parse_number<T: std::str::FromStr>(value: &str, key: &str, origin: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::format(origin, line, format!("bad {key}: {value:?}")))
}

fn parse_class_key(value: &str, origin: &str, line: usize) -> Result<Option<LinkClassKey>> {
    if value == "global" {
        return Ok(None);
    }
    let bad = || Error::format(origin, line, format!("bad link class {value:?}"));
    let (s, t) = value.split_once('/').ok_or_else(bad)?;
    Ok(Some(LinkClassKey {
        src: s.parse().map_err(|_| bad())?,
        tgt: t.parse().map_err(|_| bad())?,
    }))
}

struct Row {
    u: Option<String>,
    v: Option<String>,
    values: [Option<f64>; 4],
}

/// Parses a model file. `origin` names the source in error messages.
pub fn parse_model(text: &str, origin: &str) -> Result<ModelFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (n, first) = lines
        .next()
        .ok_or_else(|| Error::format(origin, 1, "empty model file"))?;
    if !first.starts_with("#method=") {
        return Err(Error::format(origin, n, "first line must start with #method="));
    }
    let kv = key_values(origin, n, first[1..].split('\t'))?;
    let get = |key: &str| required(&kv, key, origin, n);
    let method: Method = get("method")?
        .parse()
        .map_err(|e: String| Error::format(origin, n, e))?;
    let mut header = ModelHeader {
        method,
        iterations: parse_number(get("iterations")?, "iterations", origin, n)?,
        converged: parse_number(get("converged")?, "converged", origin, n)?,
        links_total: parse_number(get("links_total")?, "links_total", origin, n)?,
        aux: Vec::new(),
    };

    let mut rows = Vec::new();
    let mut seen_columns = false;
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#aux\t") {
            let kv = key_values(origin, n, rest.split('\t'))?;
            let value = |key: &str| -> Result<f64> {
                parse_number(required(&kv, key, origin, n)?, key, origin, n)
            };
            header.aux.push(AuxParams {
                lambda_plus: value("lambda_plus")?,
                lambda_minus: value("lambda_minus")?,
                lambda: value("lambda")?,
                tau: value("tau")?,
                link_class: parse_class_key(required(&kv, "class", origin, n)?, origin, n)?,
            });
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !seen_columns {
            if fields != COLUMNS {
                return Err(Error::format(
                    origin,
                    n,
                    format!("expected column header {:?}", COLUMNS.join("\t")),
                ));
            }
            seen_columns = true;
            continue;
        }
        if fields.len() != COLUMNS.len() {
            return Err(Error::format(
                origin,
                n,
                format!("expected {} fields, found {}", COLUMNS.len(), fields.len()),
            ));
        }
        let mut values = [None; 4];
        for (k, slot) in values.iter_mut().enumerate() {
            *slot = parse_f64(origin, n, fields[k + 2], COLUMNS[k + 2])?;
        }
        rows.push(Row {
            u: parse_word(fields[0]),
            v: parse_word(fields[1]),
            values,
        });
    }
    if !seen_columns {
        return Err(Error::format(origin, 1, "missing column header"));
    }

    let vocab = |pick: fn(&Row) -> &Option<String>| {
        let counts: BTreeMap<String, u64> = rows
            .iter()
            .filter_map(|r| pick(r).clone().map(|w| (w, 0)))
            .collect();
        Arc::new(Vocab::from_counts(counts))
    };
    let src = vocab(|r| &r.u);
    let tgt = vocab(|r| &r.v);
    let id = |vocab: &Vocab, w: &Option<String>| {
        w.as_deref()
            .map_or(WordId::NULL, |w| vocab.get(w).expect("word collected above"))
    };

    let mut joint = BTreeMap::new();
    let mut forward = Vec::new();
    let mut backward = Vec::new();
    let mut like = LikelihoodTable::new();
    for r in &rows {
        let (u, v) = (id(&src, &r.u), id(&tgt, &r.v));
        let [j, f, b, l] = r.values;
        if let Some(j) = j {
            joint.insert((u, v), j);
        }
        if let Some(f) = f {
            forward.push((u, v, f));
        }
        if let Some(b) = b {
            backward.push((v, u, b));
        }
        if let Some(l) = l {
            like.insert(u, v, l);
        }
    }
    let model = if method == Method::Model1 || joint.is_empty() {
        TranslationModel::from_conditionals(
            method,
            header.iterations,
            src,
            tgt,
            Conditional::from_probabilities(forward),
            Conditional::from_probabilities(backward),
        )
    } else {
        TranslationModel::from_joint(method, header.iterations, src, tgt, joint, header.links_total)
    };
    Ok(ModelFile {
        header,
        model,
        like,
    })
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, &path.display().to_string())
}
