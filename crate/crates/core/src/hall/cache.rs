//! Persistent JSON-lines store for subrepresentation sweep results.
//!
//! One file per (quiver, prime, budget) triple. Class indices are only
//! meaningful within a run, so the file assigns its own ids and carries a
//! witness representation for each id; on load, witnesses are identified
//! against the live registry to translate the records. A sweep's count
//! records are only trusted once its completion marker line is present, so
//! a run that died halfway through a sweep leaves nothing adoptable behind.
//! Unreadable lines are skipped with a warning and recomputed naturally.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::quiver::{DimVec, Quiver};
use crate::repmod::{ClassRegistry, FqMat, Rep};
use crate::Result;

#[derive(Serialize, Deserialize)]
enum Line {
    /// Defines a file-local class id by a witness representation.
    #[serde(rename = "class")]
    Class { id: u64, dims: Vec<u32>, maps: Vec<Vec<Vec<u32>>> },
    /// One subrepresentation count: `count` subrepresentations of `l`
    /// isomorphic to `n` with quotient `m`.
    #[serde(rename = "count")]
    Count { m: u64, n: u64, l: u64, count: String },
    /// Marks the sweep over `(l, sub_dims)` as completely recorded.
    #[serde(rename = "done")]
    Done { l: u64, sub_dims: Vec<u32> },
}

pub struct SweepCache {
    path: PathBuf,
    quiver: Quiver,
    p: u32,
    witnesses: HashMap<u64, Rep>,
    counts: HashMap<(u64, DimVec), BTreeMap<(u64, u64), BigInt>>,
    complete: Vec<(u64, DimVec)>,
    /// registry class index -> file id, for appending new sweeps.
    file_id_of: HashMap<usize, u64>,
    written: HashSet<u64>,
    next_id: u64,
    warnings: Vec<String>,
    /// Set after an unrecoverable write failure; further records are skipped.
    disabled: bool,
}

impl SweepCache {
    /// Opens (or prepares) the store for this quiver/prime/budget triple
    /// under `dir`, reading whatever consistent records already exist.
    pub fn open(dir: &Path, quiver: Quiver, p: u32, budget: u128) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let mut hasher = Sha256::new();
        hasher.update(quiver.to_json_string().as_bytes());
        hasher.update(b"\n");
        hasher.update(p.to_string().as_bytes());
        hasher.update(b"\n");
        hasher.update(budget.to_string().as_bytes());
        let digest = hasher.finalize();
        let tag: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        let path = dir.join(format!("hall-p{p}-{tag}.jsonl"));
        let mut cache = SweepCache {
            path,
            quiver,
            p,
            witnesses: HashMap::new(),
            counts: HashMap::new(),
            complete: Vec::new(),
            file_id_of: HashMap::new(),
            written: HashSet::new(),
            next_id: 0,
            warnings: Vec::new(),
            disabled: false,
        };
        cache.read_existing();
        Ok(cache)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.warnings)
    }

    fn read_existing(&mut self) {
        let text = match fs::read_to_string(&self.path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return,
            Err(e) => {
                self.warnings.push(format!("cannot read cache file {}: {e}", self.path.display()));
                return;
            }
        };
        for (no, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let line: Line = match serde_json::from_str(raw) {
                Ok(l) => l,
                Err(e) => {
                    self.warnings.push(format!(
                        "{}:{}: unreadable cache line ({e}); it will be recomputed",
                        self.path.display(),
                        no + 1
                    ));
                    continue;
                }
            };
            match line {
                Line::Class { id, dims, maps } => match self.build_witness(&dims, &maps) {
                    Some(rep) => {
                        self.witnesses.insert(id, rep);
                        self.written.insert(id);
                        self.next_id = self.next_id.max(id + 1);
                    }
                    None => {
                        self.warnings.push(format!(
                            "{}:{}: witness shape does not fit the quiver; skipped",
                            self.path.display(),
                            no + 1
                        ));
                    }
                },
                Line::Count { m, n, l, count } => {
                    let Some(cnt) = BigInt::parse_bytes(count.as_bytes(), 10) else {
                        self.warnings.push(format!(
                            "{}:{}: unreadable count; skipped",
                            self.path.display(),
                            no + 1
                        ));
                        continue;
                    };
                    let Some(sub_dims) = self.witnesses.get(&n).map(|w| w.dims.clone()) else {
                        self.warnings.push(format!(
                            "{}:{}: count references unknown class {n}; skipped",
                            self.path.display(),
                            no + 1
                        ));
                        continue;
                    };
                    self.counts.entry((l, sub_dims)).or_default().insert((m, n), cnt);
                }
                Line::Done { l, sub_dims } => {
                    self.complete.push((l, sub_dims));
                }
            }
        }
    }

    fn build_witness(&self, dims: &[u32], maps: &[Vec<Vec<u32>>]) -> Option<Rep> {
        let arrows = self.quiver.arrows();
        if dims.len() != self.quiver.vertex_count() || maps.len() != arrows.len() {
            return None;
        }
        let mut mats = Vec::with_capacity(maps.len());
        for (rows, &(s, t)) in maps.iter().zip(&arrows) {
            if rows.len() != dims[t] as usize
                || rows.iter().any(|r| r.len() != dims[s] as usize)
                || rows.iter().flatten().any(|&x| x >= self.p)
            {
                return None;
            }
            // FqMat::from_rows accepts an empty matrix only via zero()
            if rows.is_empty() || rows[0].is_empty() {
                mats.push(FqMat::zero(self.p, dims[t] as usize, dims[s] as usize));
            } else {
                mats.push(FqMat::from_rows(self.p, rows));
            }
        }
        Some(Rep::new(&self.quiver, self.p, dims.to_vec(), mats))
    }

    /// Translates every completely recorded sweep into registry indices.
    /// Sweeps referencing undefined ids are skipped with a warning.
    #[allow(clippy::type_complexity)]
    pub fn adopt(
        &mut self,
        registry: &mut ClassRegistry,
    ) -> Vec<((usize, DimVec), BTreeMap<(usize, usize), BigInt>)> {
        let mut translated: HashMap<u64, usize> = HashMap::new();
        let mut resolve = |id: u64,
                           registry: &mut ClassRegistry,
                           witnesses: &HashMap<u64, Rep>|
         -> Option<usize> {
            if let Some(&c) = translated.get(&id) {
                return Some(c);
            }
            let rep = witnesses.get(&id)?;
            let c = registry.identify(rep);
            translated.insert(id, c);
            Some(c)
        };
        let mut out = Vec::new();
        let complete = std::mem::take(&mut self.complete);
        for (l_id, sub_dims) in &complete {
            let Some(l_reg) = resolve(*l_id, registry, &self.witnesses) else {
                self.warnings.push(format!(
                    "cache sweep for id {l_id} lacks its witness; recomputing"
                ));
                continue;
            };
            let stored = self
                .counts
                .get(&(*l_id, sub_dims.clone()))
                .cloned()
                .unwrap_or_default();
            let mut map: BTreeMap<(usize, usize), BigInt> = BTreeMap::new();
            let mut ok = true;
            for ((m_id, n_id), cnt) in stored {
                let (Some(m), Some(n)) = (
                    resolve(m_id, registry, &self.witnesses),
                    resolve(n_id, registry, &self.witnesses),
                ) else {
                    ok = false;
                    break;
                };
                map.insert((m, n), cnt);
            }
            if !ok {
                self.warnings
                    .push(format!("cache sweep for id {l_id} references missing classes; recomputing"));
                continue;
            }
            out.push(((l_reg, sub_dims.clone()), map));
        }
        for (id, reg) in &translated {
            self.file_id_of.insert(*reg, *id);
        }
        self.complete = complete;
        out
    }

    /// Discards the file and all loaded state; subsequent records start a
    /// fresh store.
    pub fn rebuild(&mut self) {
        self.witnesses.clear();
        self.counts.clear();
        self.complete.clear();
        self.file_id_of.clear();
        self.written.clear();
        self.next_id = 0;
        if let Err(e) = fs::write(&self.path, b"") {
            self.warnings.push(format!(
                "cannot rewrite cache file {}: {e}; caching disabled",
                self.path.display()
            ));
            self.disabled = true;
        }
    }

    fn class_line(&mut self, registry: &ClassRegistry, class: usize) -> (u64, Option<String>) {
        let id = match self.file_id_of.get(&class) {
            Some(&id) => id,
            None => {
                let id = self.next_id;
                self.next_id += 1;
                self.file_id_of.insert(class, id);
                id
            }
        };
        if self.written.contains(&id) {
            return (id, None);
        }
        self.written.insert(id);
        let w = &registry.class(class).witness;
        let maps: Vec<Vec<Vec<u32>>> = w
            .maps
            .iter()
            .map(|m| (0..m.rows).map(|r| m.row(r).to_vec()).collect())
            .collect();
        let line = Line::Class { id, dims: w.dims.clone(), maps };
        (id, Some(serde_json::to_string(&line).expect("serializable")))
    }

    /// Appends one completed sweep (witness definitions, counts, marker).
    pub fn record(
        &mut self,
        registry: &ClassRegistry,
        l: usize,
        sub_dims: &[u32],
        counts: &BTreeMap<(usize, usize), BigInt>,
    ) {
        if self.disabled {
            return;
        }
        let mut lines: Vec<String> = Vec::new();
        let (l_id, def) = self.class_line(registry, l);
        lines.extend(def);
        let mut count_lines = Vec::with_capacity(counts.len());
        for ((m, n), cnt) in counts {
            if cnt.is_zero() {
                continue;
            }
            let (m_id, def) = self.class_line(registry, *m);
            lines.extend(def);
            let (n_id, def) = self.class_line(registry, *n);
            lines.extend(def);
            count_lines.push(
                serde_json::to_string(&Line::Count {
                    m: m_id,
                    n: n_id,
                    l: l_id,
                    count: cnt.to_string(),
                })
                .expect("serializable"),
            );
        }
        lines.extend(count_lines);
        lines.push(
            serde_json::to_string(&Line::Done { l: l_id, sub_dims: sub_dims.to_vec() })
                .expect("serializable"),
        );
        let mut blob = lines.join("\n");
        blob.push('\n');
        let write = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .and_then(|mut f| f.write_all(blob.as_bytes()));
        if let Err(e) = write {
            self.warnings.push(format!(
                "cannot append to cache file {}: {e}; caching disabled",
                self.path.display()
            ));
            self.disabled = true;
        }
    }
}
