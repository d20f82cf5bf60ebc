use std::fmt;

/// A command failure tagged with its exit-code class.
#[derive(Debug)]
pub enum Failure {
    /// Bad or unreadable configuration / flags (exit 1).
    Config(anyhow::Error),
    /// Input data rejected by a pipeline stage (exit 2).
    Data(anyhow::Error),
    /// A broken internal invariant or an output write failure (exit 3).
    Internal(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, e) = match self {
            Failure::Config(e) => ("config error", e),
            Failure::Data(e) => ("data error", e),
            Failure::Internal(e) => ("internal error", e),
        };
        write!(f, "{kind}: {e:#}")
    }
}

pub type CmdResult<T> = Result<T, Failure>;

/// Attach a stage name and classify as a data error.
pub trait DataContext<T> {
    fn data(self, stage: &str) -> CmdResult<T>;
}

impl<T, E: std::error::Error + Send + Sync + 'static> DataContext<T> for Result<T, E> {
    fn data(self, stage: &str) -> CmdResult<T> {
        self.map_err(|e| Failure::Data(anyhow::Error::new(e).context(stage.to_string())))
    }
}

pub fn internal(msg: impl fmt::Display) -> Failure {
    Failure::Internal(anyhow::anyhow!("{msg}"))
}

pub fn config(msg: impl fmt::Display) -> Failure {
    Failure::Config(anyhow::anyhow!("{msg}"))
}
