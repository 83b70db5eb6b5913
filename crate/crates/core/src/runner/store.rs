//! On-disk layout of one run:
//!
//! ```text
//! <run>/config.toml
//! <run>/manifest.json          rewritten after every generation
//! <run>/state.json             resume point after the last finished generation
//! <run>/gen_001/archives.json
//! <run>/gen_001/evals.jsonl    header line, then one record per evaluation
//! <run>/gen_001/selection.json
//! ```

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    advance_game, genome_digest, initial_tasks, GenerationArtifacts, RunManifest, RunObserver,
    RunState, TOOL_VERSION,
};
use crate::error::{Error, Result};
use crate::io::{read_json, write_atomic, write_json, write_json_compact};
use crate::model::{RunConfig, Side};
use crate::mtmb::{read_eval_log, write_eval_log, EvalRecord, TaskArchive, TaskSet};
use crate::scalar::Scalar;
use crate::selection::SelectionReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ArchiveFile<F> {
    pub tool_version: String,
    pub config_hash: String,
    pub generation: usize,
    pub side: Side,
    pub archives: Vec<TaskArchive<F>>,
}

#[derive(Serialize, Deserialize)]
struct SelectionFile {
    tool_version: String,
    config_hash: String,
    report: SelectionReport,
}

#[derive(Serialize, Deserialize)]
struct LogHeader {
    tool_version: String,
    config_hash: String,
    generation: usize,
}

/// A run's output directory.
#[derive(Clone, Debug)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn generation_dir(&self, generation: usize) -> PathBuf {
        self.root.join(format!("gen_{generation:03}"))
    }

    pub fn exists(&self) -> bool {
        self.manifest_path().exists()
    }

    /// Runs `cfg` into this directory. An existing run is refused unless
    /// `force` (start over) or `resume` (continue after the last finished
    /// generation) is set.
    pub fn run<F: Scalar>(
        &self,
        cfg: &RunConfig,
        force: bool,
        resume: bool,
    ) -> Result<RunManifest<F>> {
        self.run_until(cfg, force, resume, cfg.n_gen)
    }

    /// [`RunDir::run`] that stops after generation `until`.
    pub fn run_until<F: Scalar>(
        &self,
        cfg: &RunConfig,
        force: bool,
        resume: bool,
        until: usize,
    ) -> Result<RunManifest<F>> {
        cfg.validate()?;
        let state = if resume && self.root.join("state.json").exists() {
            let state = self.load_state::<F>(cfg)?;
            log::info!(
                "resuming {} after generation {}",
                self.root.display(),
                state.completed
            );
            state
        } else {
            if self.root.exists()
                && fs::read_dir(&self.root)
                    .map_err(|e| Error::io(&self.root, e))?
                    .next()
                    .is_some()
            {
                if !force && !resume {
                    return Err(Error::usage(format!(
                        "{} already holds a run; pass --force to overwrite or --resume to continue",
                        self.root.display()
                    )));
                }
                if force {
                    fs::remove_dir_all(&self.root).map_err(|e| Error::io(&self.root, e))?;
                }
            }
            fs::create_dir_all(&self.root).map_err(|e| Error::io(&self.root, e))?;
            write_atomic(
                &self.root.join("config.toml"),
                cfg.to_toml_string().as_bytes(),
            )?;
            let state = RunState::fresh(cfg);
            write_json(&self.manifest_path(), &state.manifest(cfg))?;
            state
        };
        let mut observer = DirObserver { dir: self, cfg };
        let state = advance_game(cfg, state, &mut observer, until)?;
        Ok(state.manifest(cfg))
    }

    pub fn load_state<F: Scalar>(&self, cfg: &RunConfig) -> Result<RunState<F>> {
        let state: RunState<F> = read_json(&self.root.join("state.json"))?;
        if state.config_hash != cfg.config_hash() {
            return Err(Error::integrity(format!(
                "{} was produced by a different configuration",
                self.root.display()
            )));
        }
        Ok(state)
    }

    pub fn load_config(&self) -> Result<RunConfig> {
        RunConfig::load(&self.root.join("config.toml"))
    }

    pub fn load_manifest<F: Scalar>(&self) -> Result<RunManifest<F>> {
        read_json(&self.manifest_path())
    }

    pub fn load_archives<F: Scalar>(&self, generation: usize) -> Result<ArchiveFile<F>> {
        read_json(&self.generation_dir(generation).join("archives.json"))
    }

    pub fn load_selection(&self, generation: usize) -> Result<SelectionReport> {
        let f: SelectionFile = read_json(&self.generation_dir(generation).join("selection.json"))?;
        Ok(f.report)
    }

    pub fn load_eval_log(&self, generation: usize) -> Result<Vec<EvalRecord>> {
        let path = self.generation_dir(generation).join("evals.jsonl");
        let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut reader = BufReader::new(file);
        let mut header = String::new();
        reader
            .read_line(&mut header)
            .map_err(|e| Error::io(&path, e))?;
        serde_json::from_str::<LogHeader>(&header)
            .map_err(|e| Error::integrity(format!("{}: bad header: {e}", path.display())))?;
        read_eval_log(reader)
    }

    /// The opponents generation `generation` was evolved against, rebuilt from
    /// the previous generation's archives and selection and checked against
    /// the digests in the manifest.
    pub fn tasks_consumed<F: Scalar>(
        &self,
        cfg: &RunConfig,
        generation: usize,
    ) -> Result<TaskSet<F>> {
        let tasks = if generation == 1 {
            initial_tasks(cfg)
        } else {
            let prev = self.load_archives::<F>(generation - 1)?;
            let sel = self.load_selection(generation - 1)?;
            let genomes = sel
                .selected
                .iter()
                .map(|id| {
                    prev.archives
                        .get(id.task)
                        .and_then(|a| a.elites().get(id.cell))
                        .map(|e| e.solution.clone())
                        .ok_or_else(|| {
                            Error::integrity(format!(
                                "{}: selection of generation {} names a missing elite",
                                self.root.display(),
                                generation - 1
                            ))
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            TaskSet::new(generation, prev.side, genomes)?
        };
        let manifest = self.load_manifest::<F>()?;
        if let Some(rec) = manifest
            .generations
            .iter()
            .find(|r| r.generation == generation)
        {
            let digests: Vec<String> = tasks.tasks.iter().map(genome_digest).collect();
            if digests != rec.tasks_consumed {
                return Err(Error::integrity(format!(
                    "{}: rebuilt tasks of generation {generation} do not match the manifest",
                    self.root.display()
                )));
            }
        }
        Ok(tasks)
    }

    /// Archives of the last generation that evolved `side`.
    pub fn final_archives<F: Scalar>(
        &self,
        manifest: &RunManifest<F>,
        side: Side,
    ) -> Result<ArchiveFile<F>> {
        let g = manifest
            .generations
            .iter()
            .rev()
            .find(|r| r.evolving_side == side)
            .ok_or_else(|| {
                Error::integrity(format!("{} never evolved {side}", self.root.display()))
            })?;
        self.load_archives(g.generation)
    }

    fn write_generation<F: Scalar>(
        &self,
        cfg: &RunConfig,
        art: &GenerationArtifacts<F>,
        state: &RunState<F>,
    ) -> Result<()> {
        let g = art.record.generation;
        let dir = self.generation_dir(g);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let hash = cfg.config_hash();
        write_json_compact(
            &dir.join("archives.json"),
            &ArchiveFile {
                tool_version: TOOL_VERSION.to_string(),
                config_hash: hash.clone(),
                generation: g,
                side: art.record.evolving_side,
                archives: art.archives.clone(),
            },
        )?;
        write_json(
            &dir.join("selection.json"),
            &SelectionFile {
                tool_version: TOOL_VERSION.to_string(),
                config_hash: hash.clone(),
                report: art.selection.clone(),
            },
        )?;
        let log_path = dir.join("evals.jsonl");
        let tmp = log_path.with_extension("tmp");
        let file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        let header = LogHeader {
            tool_version: TOOL_VERSION.to_string(),
            config_hash: hash,
            generation: g,
        };
        serde_json::to_writer(&mut w, &header).expect("header serializes");
        w.write_all(b"\n").map_err(|e| Error::io(&tmp, e))?;
        write_eval_log(&art.log, &mut w).map_err(|e| Error::io(&tmp, e))?;
        w.flush().map_err(|e| Error::io(&tmp, e))?;
        drop(w);
        fs::rename(&tmp, &log_path).map_err(|e| Error::io(&log_path, e))?;

        // state before manifest: a manifest never runs ahead of its resume point
        write_json_compact(&self.root.join("state.json"), state)?;
        write_json(&self.manifest_path(), &state.manifest(cfg))
    }
}

struct DirObserver<'a> {
    dir: &'a RunDir,
    cfg: &'a RunConfig,
}

impl<F: Scalar> RunObserver<F> for DirObserver<'_> {
    fn on_generation(&mut self, art: &GenerationArtifacts<F>, state: &RunState<F>) -> Result<()> {
        self.dir.write_generation(self.cfg, art, state)
    }
}
