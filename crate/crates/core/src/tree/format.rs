//! Tree text format: one `id parent` line per node, `-` for roots.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::Tree;
use crate::error::{Error, Result};

pub fn parse_tree_text(text: &str) -> Result<Tree> {
    let mut entries: Vec<(usize, usize, Option<usize>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: &str| Error::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        let mut fields = line.split_whitespace();
        let id = fields
            .next()
            .and_then(|f| f.parse::<usize>().ok())
            .ok_or_else(|| parse_err("expected a node id"))?;
        let parent = match fields.next() {
            Some("-") => None,
            Some(f) => Some(
                f.parse::<usize>()
                    .map_err(|_| parse_err("expected a parent id or '-'"))?,
            ),
            None => return Err(parse_err("missing parent field")),
        };
        if fields.next().is_some() {
            return Err(parse_err("trailing fields"));
        }
        entries.push((line_no, id, parent));
    }

    let n = entries.len();
    let mut parents: Vec<Option<Option<usize>>> = vec![None; n];
    for &(line, id, parent) in &entries {
        if id >= n {
            return Err(Error::Parse {
                line,
                msg: format!("node ids must be dense in 0..{n}, got {id}"),
            });
        }
        if parents[id].is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate node id {id}"),
            });
        }
        if let Some(p) = parent {
            if p >= n {
                return Err(Error::Parse {
                    line,
                    msg: format!("parent {p} is not a node"),
                });
            }
        }
        parents[id] = Some(parent);
    }
    let parents: Vec<Option<usize>> = parents.into_iter().map(|p| p.expect("dense")).collect();
    Tree::from_parents(&parents)
}

pub fn write_tree_text(tree: &Tree) -> String {
    let mut out = String::new();
    for t in tree.nodes() {
        match tree.parent(t) {
            Some(p) => writeln!(out, "{t} {p}"),
            None => writeln!(out, "{t} -"),
        }
        .expect("string write");
    }
    out
}

/// JSON mirror of [`Tree`]'s fields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub n: usize,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub depth: Vec<usize>,
}

impl From<&Tree> for TreeJson {
    fn from(tree: &Tree) -> Self {
        TreeJson {
            n: tree.len(),
            parent: tree.parents(),
            children: tree
                .nodes()
                .map(|t| tree.children(t).iter().map(|c| c.0).collect())
                .collect(),
            depth: tree.nodes().map(|t| tree.depth(t)).collect(),
        }
    }
}

impl TryFrom<TreeJson> for Tree {
    type Error = Error;

    fn try_from(json: TreeJson) -> Result<Tree> {
        if json.parent.len() != json.n {
            return Err(Error::InvalidArgument(format!(
                "n = {} but {} parent entries",
                json.n,
                json.parent.len()
            )));
        }
        let tree = Tree::from_parents(&json.parent)?;
        if TreeJson::from(&tree) != json {
            return Err(Error::InvalidArgument(
                "children/depth fields disagree with parent".into(),
            ));
        }
        Ok(tree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_with_comments_and_any_order() {
        let t = parse_tree_text("# v-tree\n2 0\n0 -\n\n1 0\n").unwrap();
        assert_eq!(t.parents(), vec![None, Some(0), Some(0)]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_tree_text("0 -\n0 -\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_tree_text("0 -\n2 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_tree_text("0 x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_tree_text("0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_tree_text("0 - 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_tree_text("0 5\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert_eq!(parse_tree_text("0 1\n1 0\n"), Err(Error::Cycle(0)));
    }

    #[test]
    fn json_rejects_inconsistent_children() {
        let mut json = TreeJson::from(&Tree::star(2));
        json.children[0].pop();
        assert!(Tree::try_from(json).is_err());
    }

    fn arb_parents() -> impl Strategy<Value = Vec<Option<usize>>> {
        (0usize..12).prop_flat_map(|n| {
            (0..n)
                .map(|i| {
                    if i == 0 {
                        Just(None).boxed()
                    } else {
                        prop_oneof![Just(None), (0..i).prop_map(Some)].boxed()
                    }
                })
                .collect::<Vec<_>>()
        })
    }

    proptest! {
        #[test]
        fn text_and_json_round_trip(parents in arb_parents()) {
            let tree = Tree::from_parents(&parents).unwrap();
            prop_assert_eq!(&parse_tree_text(&write_tree_text(&tree)).unwrap(), &tree);
            let json = serde_json::to_string(&TreeJson::from(&tree)).unwrap();
            let back: TreeJson = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(&Tree::try_from(back).unwrap(), &tree);
        }
    }
}
