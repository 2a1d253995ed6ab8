//! Exit-code classes: 1 usage, 2 input data, 3 systemic runtime or output.

use std::fmt;

use spix_core::Error;

#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Systemic(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Systemic(_) => 3,
        }
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure::Usage(anyhow::anyhow!("{msg}"))
    }

    /// Class of a core error raised outside explicit input or output handling.
    pub fn classify(e: Error) -> Self {
        match e {
            Error::UnknownAlgorithm(_) | Error::InvalidParameter { .. } => Failure::Usage(e.into()),
            Error::AllFailed(_) | Error::NoFeasibleCombination { .. } => Failure::Systemic(e.into()),
            _ => Failure::Data(e.into()),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (Failure::Usage(e) | Failure::Data(e) | Failure::Systemic(e)) = self;
        // Core errors already embed their source text; print each cause once.
        let mut shown = String::new();
        for cause in e.chain().map(|c| c.to_string()) {
            if shown.contains(&cause) {
                continue;
            }
            if !shown.is_empty() {
                shown.push_str(": ");
            }
            shown.push_str(&cause);
        }
        f.write_str(&shown)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::classify(e)
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

/// Tags an error with its exit-code class at the call site.
pub trait Classify<T> {
    fn data(self, context: impl fmt::Display) -> CliResult<T>;
    fn systemic(self, context: impl fmt::Display) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn data(self, context: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| Failure::Data(e.into().context(context.to_string())))
    }

    fn systemic(self, context: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| Failure::Systemic(e.into().context(context.to_string())))
    }
}
