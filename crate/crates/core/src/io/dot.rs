//! Graphviz DOT rendering.

use std::fmt::Write;

use crate::designer::{ModuleKind, ModuleRef, Mtag};
use crate::model::Mtkg;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DotOptions {
    /// Graph name; defaults to `mtkg` or `mtag`.
    pub name: Option<String>,
    /// Label knowledge-graph edges with `w_trans/w_share_e/w_share_d`.
    pub weights: bool,
}

impl Default for DotOptions {
    fn default() -> Self {
        DotOptions {
            name: None,
            weights: true,
        }
    }
}

pub trait ToDot {
    fn to_dot(&self, options: &DotOptions) -> String;
}

pub fn to_dot<T: ToDot + ?Sized>(value: &T, options: &DotOptions) -> String {
    value.to_dot(options)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn open(name: &str) -> String {
    format!("digraph {} {{\n", quote_id(name))
}

/// Bare identifiers stay bare; anything else is quoted.
fn quote_id(s: &str) -> String {
    let bare = !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if bare {
        s.to_string()
    } else {
        quote(s)
    }
}

impl ToDot for Mtkg {
    /// Bi-directional pairs are drawn once with `dir=both`.
    fn to_dot(&self, options: &DotOptions) -> String {
        let mut out = open(options.name.as_deref().unwrap_or("mtkg"));
        for info in self.tasks().values() {
            let _ = writeln!(
                out,
                "  {} [label={}];",
                quote(info.id.as_str()),
                quote(&info.display_name)
            );
        }
        for ((src, dst), w) in self.edges() {
            let reverse = self.edge(dst, src);
            if reverse.is_some() && dst < src {
                continue;
            }
            let mut attrs = Vec::new();
            if reverse.is_some() {
                attrs.push("dir=both".to_string());
            }
            if options.weights {
                let label = match reverse {
                    Some(r) if r != w => format!("{w} | {r}"),
                    _ => w.to_string(),
                };
                attrs.push(format!("label={}", quote(&label)));
            }
            let _ = write!(out, "  {} -> {}", quote(src.as_str()), quote(dst.as_str()));
            if !attrs.is_empty() {
                let _ = write!(out, " [{}]", attrs.join(", "));
            }
            out.push_str(";\n");
        }
        out.push_str("}\n");
        out
    }
}

fn module_id(m: &ModuleRef) -> String {
    let k = match m.kind {
        ModuleKind::Encoder => "E",
        ModuleKind::Decoder => "D",
    };
    quote(&format!("{k}:{}", m.task))
}

impl ToDot for Mtag {
    /// Encoders are boxes, decoders ellipses; passes are solid arrows and
    /// sharing pairs dashed undirected edges.
    fn to_dot(&self, options: &DotOptions) -> String {
        let mut out = open(options.name.as_deref().unwrap_or("mtag"));
        for m in self.modules() {
            let shape = match m.kind {
                ModuleKind::Encoder => "box",
                ModuleKind::Decoder => "ellipse",
            };
            let _ = writeln!(
                out,
                "  {} [label={}, shape={shape}];",
                module_id(&m),
                quote(&m.to_string())
            );
        }
        for p in self.r_pass() {
            let _ = writeln!(out, "  {} -> {};", module_id(&p.from), module_id(&p.to));
        }
        for p in self.r_share() {
            let _ = writeln!(
                out,
                "  {} -> {} [style=dashed, dir=none];",
                module_id(p.first()),
                module_id(p.second())
            );
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EdgeWeights, Mtkg};

    #[test]
    fn empty_graph() {
        assert_eq!(
            Mtkg::default().to_dot(&DotOptions::default()),
            "digraph mtkg {\n}\n"
        );
    }

    #[test]
    fn names_are_quoted_when_needed() {
        let opts = DotOptions {
            name: Some("my graph".into()),
            weights: false,
        };
        assert!(Mtkg::default()
            .to_dot(&opts)
            .starts_with("digraph \"my graph\" {"));
        assert_eq!(quote("a\"b\\"), "\"a\\\"b\\\\\"");
    }

    #[test]
    fn asymmetric_bi_pair_shows_both_weights() {
        let g = Mtkg::builder()
            .uni("A", "B", EdgeWeights::new(2, 1, 0))
            .uni("B", "A", EdgeWeights::new(3, 0, 0))
            .build()
            .unwrap();
        let dot = g.to_dot(&DotOptions::default());
        assert!(
            dot.contains("\"A\" -> \"B\" [dir=both, label=\"2/1/0 | 3/0/0\"];"),
            "{dot}"
        );
        assert!(!dot.contains("\"B\" -> \"A\""));
    }
}
