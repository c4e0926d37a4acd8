use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{CovariateSource, Variable};
use crate::error::{Error, Result};
use crate::estimators::{ClusterKey, ModelSpec, RouteFilter};

/// Relative residual norm below which a column counts as linearly dependent
/// on the columns before it.
pub const RANK_TOLERANCE: f64 = 1e-10;

pub const INTERCEPT: &str = "_cons";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DropReason {
    AllZero,
    Constant,
    Collinear { relative_residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub name: String,
    pub reason: DropReason,
}

/// Dense row-major regressor matrix with outcome, cluster and group ids.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    /// `n * k` values, row-major.
    pub x: Vec<f64>,
    pub n: usize,
    pub k: usize,
    pub y: Vec<f64>,
    pub clusters: Vec<u32>,
    /// Random-effect groups; the airport pair.
    pub groups: Vec<u32>,
    pub dropped: Vec<DroppedColumn>,
    pub intercept: bool,
}

impl DesignMatrix {
    /// Checks shapes and finiteness. Groups default to the clusters.
    pub fn new(names: Vec<String>, x: Vec<f64>, y: Vec<f64>, clusters: Vec<u32>) -> Result<Self> {
        let k = names.len();
        let n = y.len();
        if k == 0 {
            return Err(Error::invalid("design has no columns"));
        }
        if x.len() != n * k || clusters.len() != n {
            return Err(Error::invalid(format!(
                "design shape mismatch: {} values, {n} outcomes, {k} columns, {} cluster ids",
                x.len(),
                clusters.len()
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value in column {} row {}",
                names[i % k],
                i / k
            )));
        }
        if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
            return Err(Error::invalid("outcome must be 0 or 1"));
        }
        let intercept = names.first().is_some_and(|s| s == INTERCEPT);
        Ok(DesignMatrix {
            names,
            x,
            n,
            k,
            y,
            groups: clusters.clone(),
            clusters,
            dropped: Vec::new(),
            intercept,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.k..(i + 1) * self.k]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.k + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|s| s == name)
    }

    pub fn cluster_count(&self) -> usize {
        let mut ids = self.clusters.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    pub fn positives(&self) -> usize {
        self.y.iter().filter(|v| **v == 1.0).count()
    }

    pub fn with_clusters(mut self, clusters: Vec<u32>) -> Result<Self> {
        if clusters.len() != self.n {
            return Err(Error::invalid("cluster ids must align with rows"));
        }
        self.clusters = clusters;
        Ok(self)
    }

    pub fn with_groups(mut self, groups: Vec<u32>) -> Result<Self> {
        if groups.len() != self.n {
            return Err(Error::invalid("group ids must align with rows"));
        }
        self.groups = groups;
        Ok(self)
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> DesignMatrix {
        let k = keep.len();
        let mut x = Vec::with_capacity(self.n * k);
        for i in 0..self.n {
            let row = self.row(i);
            x.extend(keep.iter().map(|&j| row[j]));
        }
        DesignMatrix {
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            x,
            n: self.n,
            k,
            y: self.y.clone(),
            clusters: self.clusters.clone(),
            groups: self.groups.clone(),
            dropped: self.dropped.clone(),
            intercept: keep.first() == Some(&0) && self.intercept,
        }
    }

    /// Intercept-only design on the same rows.
    pub fn intercept_only(&self) -> DesignMatrix {
        DesignMatrix {
            names: vec![INTERCEPT.to_string()],
            x: vec![1.0; self.n],
            n: self.n,
            k: 1,
            y: self.y.clone(),
            clusters: self.clusters.clone(),
            groups: self.groups.clone(),
            dropped: Vec::new(),
            intercept: true,
        }
    }
}

/// Upper-triangular factor R with XᵀX = RᵀR, accumulated over row blocks.
fn r_factor(columns: &[Vec<f64>], n: usize) -> DMatrix<f64> {
    const BLOCK: usize = 1024;
    let k = columns.len();
    let mut r = DMatrix::<f64>::zeros(0, k);
    let mut start = 0;
    while start < n {
        let end = (start + BLOCK).min(n);
        let top = r.nrows();
        let mut a = DMatrix::<f64>::zeros(top + end - start, k);
        a.rows_mut(0, top).copy_from(&r);
        for (j, col) in columns.iter().enumerate() {
            for i in start..end {
                a[(top + i - start, j)] = col[i];
            }
        }
        r = a.qr().r();
        start = end;
    }
    r
}

/// Sequential rank screen in column order: a column is kept when its
/// residual after projection on the kept columns before it exceeds
/// `RANK_TOLERANCE` times its norm. Returns kept indices and drop records.
pub fn rank_screen(names: &[String], columns: &[Vec<f64>], n: usize) -> (Vec<usize>, Vec<DroppedColumn>) {
    let r = r_factor(columns, n);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    let mut has_constant = false;
    for (j, col) in columns.iter().enumerate() {
        let mut v = r.column(j).clone_owned();
        let norm0 = v.norm();
        if norm0 == 0.0 {
            dropped.push(DroppedColumn {
                name: names[j].clone(),
                reason: DropReason::AllZero,
            });
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let residual = v.norm() / norm0;
        let constant = col.iter().all(|x| *x == col[0]);
        if residual <= RANK_TOLERANCE {
            let reason = if constant && has_constant {
                DropReason::Constant
            } else {
                DropReason::Collinear {
                    relative_residual: residual,
                }
            };
            dropped.push(DroppedColumn {
                name: names[j].clone(),
                reason,
            });
            continue;
        }
        has_constant |= constant;
        let norm = v.norm();
        basis.push(v / norm);
        keep.push(j);
    }
    (keep, dropped)
}

/// Resolves `spec` against `source`, filters rows and drops rank-deficient
/// columns in spec order (intercept first).
pub fn assemble_design(source: &dyn CovariateSource, spec: &ModelSpec) -> Result<DesignMatrix> {
    let mut vars = Vec::with_capacity(spec.variables.len());
    let mut unknown = Vec::new();
    for name in &spec.variables {
        match Variable::from_name(name) {
            Some(v) if source.has(v) => vars.push(v),
            _ => unknown.push(name.clone()),
        }
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownVariable(unknown));
    }

    let entry_year: HashMap<u32, i32> = if spec.filter.censor_after_entry {
        let mut m = HashMap::new();
        for i in 0..source.rows() {
            let r = source.row(i);
            if r.entry == 1 {
                m.entry(r.pair).or_insert(r.year);
            }
        }
        m
    } else {
        HashMap::new()
    };
    let rows: Vec<usize> = (0..source.rows())
        .filter(|&i| {
            let r = source.row(i);
            spec.filter.years.is_none_or(|w| w.contains(r.year))
                && match spec.filter.routes {
                    RouteFilter::All => true,
                    RouteFilter::Exist => r.exist,
                    RouteFilter::New => !r.exist,
                }
                && entry_year.get(&r.pair).is_none_or(|&e| r.year <= e)
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::invalid(format!("sub-sample filter of '{}' leaves no rows", spec.name)));
    }
    let n = rows.len();

    let mut names = Vec::new();
    let mut columns = Vec::new();
    if spec.intercept {
        names.push(INTERCEPT.to_string());
        columns.push(vec![1.0; n]);
    }
    for v in &vars {
        let col = source.column(*v, &rows);
        if let Some(i) = col.iter().position(|x| !x.is_finite()) {
            let r = source.row(rows[i]);
            let (o, d) = source.pair_label(r.pair);
            return Err(Error::invalid(format!(
                "{} is not finite on {o}-{d} in {}",
                v.label(),
                r.year
            )));
        }
        names.push(v.label().to_string());
        columns.push(col);
    }

    let (keep, dropped) = rank_screen(&names, &columns, n);
    let k = keep.len();
    let mut x = vec![0.0; n * k];
    for (c, &j) in keep.iter().enumerate() {
        for (i, v) in columns[j].iter().enumerate() {
            x[i * k + c] = *v;
        }
    }
    drop(columns);
    let infos: Vec<_> = rows.iter().map(|&i| source.row(i)).collect();
    let y = infos.iter().map(|r| f64::from(r.entry)).collect();
    let groups: Vec<u32> = infos.iter().map(|r| r.pair).collect();
    let clusters = match spec.cluster {
        ClusterKey::Pair => groups.clone(),
        ClusterKey::Observation => (0..n as u32).collect(),
    };
    Ok(DesignMatrix {
        intercept: spec.intercept && keep.first() == Some(&0),
        names: keep.iter().map(|&j| names[j].clone()).collect(),
        x,
        n,
        k,
        y,
        clusters,
        groups,
        dropped,
    })
}
