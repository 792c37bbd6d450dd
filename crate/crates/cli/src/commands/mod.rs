pub mod bell;
pub mod evolve;
pub mod rb;
pub mod selftest;
pub mod sweep;
pub mod synth;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::RunDir;

pub struct Ctx {
    pub cfg: RunConfig,
    pub dir: RunDir,
    pub quiet: bool,
}

impl Ctx {
    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        text.push('\n');
        self.dir.write(name, &text)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<()> {
        self.dir.write(name, text)
    }
}
