use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("invalid scene data: {0}")]
    Format(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("scene {scene_id}: {source}")]
    Scene {
        scene_id: String,
        #[source]
        source: rcfuse_core::Error,
    },
    #[error(transparent)]
    Core(#[from] rcfuse_core::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Coarse failure class, used as the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Io = 3,
    Format = 4,
    Config = 5,
    Pipeline = 6,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_scene(scene_id: &str, source: rcfuse_core::Error) -> Self {
        Error::Scene {
            scene_id: scene_id.to_owned(),
            source,
        }
    }

    pub fn category(&self) -> Category {
        match self {
            Error::Io { .. } | Error::Image { .. } => Category::Io,
            Error::Json { .. } | Error::Format(_) => Category::Format,
            Error::Toml { .. } | Error::Config(_) => Category::Config,
            Error::Scene { .. } | Error::Core(_) | Error::Pool(_) => Category::Pipeline,
        }
    }
}
