//! Instance files.
//!
//! Plain `key = value` lines; `#` starts a comment. Recognized keys:
//!
//! ```text
//! group      = cyclic(4)            # or: group = cyclic  +  params = 4
//! generators = [2]                  # comma separated, brackets optional
//! target     = 1
//! order      = 2                    # claimed |<generators>|
//! epsilon    = default              # optional: default | a/b | 2^-k
//! steps      = 3                    # optional walk length override
//! ```
//!
//! Element literals use the group's own notation: integers for cyclic and
//! dihedral groups (dihedral also accepts `r^i`, `s`, `s r^i`), cycle
//! notation such as `(1 2 3)` or `(123)` for symmetric groups, and `<a, b>`
//! for direct products.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::exact::parse_rational;
use crate::group::{
    parse_group, split_top_level, ConcreteGroup, EpsilonPolicy, GroupError, GroupOracle,
    ProblemInstance,
};

const KEYS: [&str; 7] = [
    "group",
    "params",
    "generators",
    "target",
    "order",
    "epsilon",
    "steps",
];

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("field `{field}` (line {line}): {source}")]
    Field {
        field: &'static str,
        line: usize,
        source: GroupError,
    },
}

/// A parsed instance plus the optional walk-length override it carries.
#[derive(Debug, Clone)]
pub struct InstanceFile {
    pub instance: ProblemInstance,
    pub steps: Option<u64>,
}

pub fn parse_instance(path: &Path) -> Result<InstanceFile, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance_str(&text)
}

pub fn parse_instance_str(text: &str) -> Result<InstanceFile, InstanceError> {
    let mut fields: BTreeMap<&'static str, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| InstanceError::Syntax {
                line,
                message: format!("expected `key = value`, got {content:?}"),
            })?;
        let key = key.trim().to_ascii_lowercase();
        let key =
            KEYS.iter()
                .copied()
                .find(|k| *k == key)
                .ok_or_else(|| InstanceError::Syntax {
                    line,
                    message: format!("unknown field `{key}`"),
                })?;
        if fields
            .insert(key, (line, value.trim().to_string()))
            .is_some()
        {
            return Err(InstanceError::Syntax {
                line,
                message: format!("duplicate field `{key}`"),
            });
        }
    }

    let take = |key: &'static str| {
        fields
            .get(key)
            .cloned()
            .ok_or(InstanceError::MissingField(key))
    };
    let field_err = |field: &'static str, line: usize| {
        move |source: GroupError| InstanceError::Field {
            field,
            line,
            source,
        }
    };

    let (group_line, group_text) = take("group")?;
    let group_expr = match fields.get("params") {
        Some((_, params)) => format!("{group_text}({params})"),
        None => group_text,
    };
    let kind = parse_group(&group_expr).map_err(field_err("group", group_line))?;
    let group = ConcreteGroup::new(kind).map_err(field_err("group", group_line))?;

    let (gen_line, gen_text) = take("generators")?;
    let inner = gen_text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .unwrap_or(&gen_text);
    let generators = split_top_level(inner, ',')
        .into_iter()
        .filter(|s| !s.is_empty())
        .map(|s| group.parse_element(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(field_err("generators", gen_line))?;

    let (target_line, target_text) = take("target")?;
    let target = group
        .parse_element(&target_text)
        .map_err(field_err("target", target_line))?;

    let (order_line, order_text) = take("order")?;
    let claimed_order: u64 = order_text.parse().map_err(|_| InstanceError::Syntax {
        line: order_line,
        message: format!("order {order_text:?} is not a non-negative integer"),
    })?;

    let epsilon = match fields.get("epsilon") {
        None => EpsilonPolicy::Default,
        Some((_, v)) if v.eq_ignore_ascii_case("default") => EpsilonPolicy::Default,
        Some((line, v)) => {
            EpsilonPolicy::Explicit(parse_rational(v).map_err(|message| InstanceError::Syntax {
                line: *line,
                message,
            })?)
        }
    };

    let steps = fields
        .get("steps")
        .map(|(line, v)| {
            v.parse::<u64>().map_err(|_| InstanceError::Syntax {
                line: *line,
                message: format!("steps {v:?} is not a non-negative integer"),
            })
        })
        .transpose()?;

    let oracle: Arc<dyn GroupOracle> = Arc::new(group);
    let instance = ProblemInstance::new(oracle, generators, target, claimed_order, epsilon)
        .map_err(field_err("order", order_line))?;
    Ok(InstanceFile { instance, steps })
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(before, _)| before)
}
