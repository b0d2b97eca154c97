//! TU Dortmund benchmark dataset loading.
//!
//! The flat-file layout stores one dataset as `name_A.txt` (comma-separated
//! directed edge list over global 1-indexed node ids), `name_graph_indicator.txt`
//! (graph id per node line), and `name_graph_labels.txt` (class label per
//! graph line). Node and edge attribute files may sit alongside; the kernel
//! is structure-only, so they are ignored.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::graph::{Graph, GraphError, SelfLoopPolicy};

#[derive(Debug, Error)]
pub enum TuError {
    #[error("missing file {}", path.display())]
    MissingFile { path: PathBuf },
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{file}:{line}: cannot parse {content:?}")]
    BadLine {
        file: String,
        line: usize,
        content: String,
    },
    #[error("{file}:{line}: node id {id} out of range 1..={max}")]
    NodeIdOutOfRange {
        file: String,
        line: usize,
        id: usize,
        max: usize,
    },
    #[error("edge list line {line}: nodes {a} and {b} belong to different graphs")]
    EdgeCrossesGraphs { line: usize, a: usize, b: usize },
    #[error("graph indicator skips graph id {graph_id}: ids must be contiguous from 1")]
    IndicatorGap { graph_id: usize },
    #[error("label file has {labels} entries for {graphs} graphs")]
    LabelCountMismatch { labels: usize, graphs: usize },
    #[error("{graphs} graphs with {labels} labels")]
    LengthMismatch { graphs: usize, labels: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A named collection of graphs with one integer class label each.
///
/// Binary datasets carry labels in {-1, +1}; the loader maps a two-value
/// label file onto that pair by ascending original value.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    graphs: Vec<Graph>,
    labels: Vec<i32>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        graphs: Vec<Graph>,
        labels: Vec<i32>,
    ) -> Result<Dataset, TuError> {
        if graphs.len() != labels.len() {
            return Err(TuError::LengthMismatch {
                graphs: graphs.len(),
                labels: labels.len(),
            });
        }
        Ok(Dataset { name: name.into(), graphs, labels })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Distinct labels, ascending.
    pub fn label_set(&self) -> Vec<i32> {
        let mut set: Vec<i32> = self.labels.iter().copied().collect();
        set.sort_unstable();
        set.dedup();
        set
    }

    pub fn is_binary(&self) -> bool {
        self.label_set().len() == 2
    }
}

/// What the loader saw besides the graphs themselves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub graphs: usize,
    /// Lines in the edge file (directed edges as published).
    pub directed_edges: usize,
    /// Undirected edges after collapsing reversed duplicates.
    pub undirected_edges: usize,
    /// Directed edges whose reverse is absent. Real TU releases store both
    /// directions; a nonzero count is reported, not fatal.
    pub asymmetric_edges: usize,
    pub self_loops_dropped: usize,
    /// Original label value to stored label, ascending by original.
    pub label_map: Vec<(i64, i32)>,
}

/// Load `name` from a directory holding the TU flat files. See
/// [`load_tu_with_report`] for the parse diagnostics.
pub fn load_tu(dir: &Path, name: &str) -> Result<Dataset, TuError> {
    load_tu_with_report(dir, name).map(|(ds, _)| ds)
}

/// Load a dataset and report edge symmetry, self loop, and label mapping
/// diagnostics.
pub fn load_tu_with_report(dir: &Path, name: &str) -> Result<(Dataset, LoadReport), TuError> {
    let indicator_path = dir.join(format!("{name}_graph_indicator.txt"));
    let labels_path = dir.join(format!("{name}_graph_labels.txt"));
    let edges_path = dir.join(format!("{name}_A.txt"));

    // Node -> graph assignment; graph ids must cover 1..=G without gaps.
    let indicator_file = file_name(&indicator_path);
    let mut node_graph: Vec<usize> = Vec::new();
    for (line_no, line) in read_lines(&indicator_path)? {
        let gid: usize = line.trim().parse().map_err(|_| TuError::BadLine {
            file: indicator_file.clone(),
            line: line_no,
            content: line.clone(),
        })?;
        if gid == 0 {
            return Err(TuError::BadLine {
                file: indicator_file.clone(),
                line: line_no,
                content: line,
            });
        }
        node_graph.push(gid - 1);
    }
    let graph_count = node_graph.iter().map(|&g| g + 1).max().unwrap_or(0);
    let mut sizes = vec![0usize; graph_count];
    for &g in &node_graph {
        sizes[g] += 1;
    }
    if let Some(gap) = sizes.iter().position(|&s| s == 0) {
        return Err(TuError::IndicatorGap { graph_id: gap + 1 });
    }

    // Local node index within each graph, in global node order.
    let mut local_index = Vec::with_capacity(node_graph.len());
    let mut seen = vec![0usize; graph_count];
    for &g in &node_graph {
        local_index.push(seen[g]);
        seen[g] += 1;
    }

    // Labels, one per graph.
    let labels_file = file_name(&labels_path);
    let mut raw_labels: Vec<i64> = Vec::new();
    for (line_no, line) in read_lines(&labels_path)? {
        let l: i64 = line.trim().parse().map_err(|_| TuError::BadLine {
            file: labels_file.clone(),
            line: line_no,
            content: line.clone(),
        })?;
        raw_labels.push(l);
    }
    if raw_labels.len() != graph_count {
        return Err(TuError::LabelCountMismatch {
            labels: raw_labels.len(),
            graphs: graph_count,
        });
    }

    // Edges: global 1-indexed pairs, both endpoints in one graph.
    let edges_file = file_name(&edges_path);
    let mut per_graph_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph_count];
    let mut directed: HashSet<(usize, usize)> = HashSet::new();
    let mut directed_edges = 0usize;
    let mut self_loops = 0usize;
    let max_node = node_graph.len();
    for (line_no, line) in read_lines(&edges_path)? {
        let mut parts = line.split(',');
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a.trim(), b.trim()),
            _ => {
                return Err(TuError::BadLine {
                    file: edges_file.clone(),
                    line: line_no,
                    content: line,
                })
            }
        };
        let parse = |s: &str| -> Result<usize, TuError> {
            s.parse().map_err(|_| TuError::BadLine {
                file: edges_file.clone(),
                line: line_no,
                content: line.clone(),
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        for id in [a, b] {
            if id == 0 || id > max_node {
                return Err(TuError::NodeIdOutOfRange {
                    file: edges_file.clone(),
                    line: line_no,
                    id,
                    max: max_node,
                });
            }
        }
        directed_edges += 1;
        let (ga, gb) = (node_graph[a - 1], node_graph[b - 1]);
        if ga != gb {
            return Err(TuError::EdgeCrossesGraphs { line: line_no, a, b });
        }
        if a == b {
            self_loops += 1;
            continue;
        }
        directed.insert((a, b));
        per_graph_edges[ga].push((local_index[a - 1], local_index[b - 1]));
    }
    let asymmetric = directed
        .iter()
        .filter(|&&(a, b)| !directed.contains(&(b, a)))
        .count();

    let mut graphs = Vec::with_capacity(graph_count);
    let mut undirected_edges = 0usize;
    for (g, edges) in per_graph_edges.iter().enumerate() {
        let built = Graph::from_edge_list(sizes[g], edges, SelfLoopPolicy::Drop)?;
        undirected_edges += built.graph.edge_count();
        graphs.push(built.graph);
    }

    let (labels, label_map) = map_labels(&raw_labels);
    let report = LoadReport {
        graphs: graph_count,
        directed_edges,
        undirected_edges,
        asymmetric_edges: asymmetric,
        self_loops_dropped: self_loops,
        label_map,
    };
    Ok((Dataset { name: name.to_string(), graphs, labels }, report))
}

/// Two distinct label values map to {-1, +1} by ascending original value;
/// any other count is stored as is.
fn map_labels(raw: &[i64]) -> (Vec<i32>, Vec<(i64, i32)>) {
    let mut distinct: Vec<i64> = raw.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() == 2 {
        let map = vec![(distinct[0], -1), (distinct[1], 1)];
        let labels = raw
            .iter()
            .map(|&l| if l == distinct[0] { -1 } else { 1 })
            .collect();
        (labels, map)
    } else {
        let map = distinct.iter().map(|&l| (l, l as i32)).collect();
        (raw.iter().map(|&l| l as i32).collect(), map)
    }
}

/// Write a dataset in TU layout. Each undirected edge is emitted in both
/// directions, matching the published files' edge symmetry.
pub fn write_tu(ds: &Dataset, dir: &Path) -> Result<(), TuError> {
    fs::create_dir_all(dir).map_err(|e| TuError::Io { path: dir.to_path_buf(), source: e })?;
    let mut bases = Vec::with_capacity(ds.len());
    let mut total = 0usize;
    for g in ds.graphs() {
        bases.push(total);
        total += g.vertex_count();
    }

    let mut a_txt = String::new();
    let mut indicator = String::new();
    let mut labels = String::new();
    for (gi, g) in ds.graphs().iter().enumerate() {
        for _ in 0..g.vertex_count() {
            let _ = writeln!(indicator, "{}", gi + 1);
        }
        for &(u, v) in g.edges() {
            let (gu, gv) = (bases[gi] + u + 1, bases[gi] + v + 1);
            let _ = writeln!(a_txt, "{gu}, {gv}");
            let _ = writeln!(a_txt, "{gv}, {gu}");
        }
        let _ = writeln!(labels, "{}", ds.labels()[gi]);
    }

    let name = ds.name();
    for (suffix, content) in [
        ("A", a_txt),
        ("graph_indicator", indicator),
        ("graph_labels", labels),
    ] {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        fs::write(&path, content).map_err(|e| TuError::Io { path, source: e })?;
    }
    Ok(())
}

/// Directory expected to hold dataset subdirectories: `$OHMK_DATA_DIR` if
/// set, else `data` under the current directory.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os("OHMK_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, TuError> {
    let content = match fs::read_to_string(path) {
        Ok(c) => c,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(TuError::MissingFile { path: path.to_path_buf() })
        }
        Err(e) => return Err(TuError::Io { path: path.to_path_buf(), source: e }),
    };
    Ok(content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.to_string()))
        .collect())
}
