use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use spamtax_core::corpus::{load_dataset, Document};
use spamtax_core::textprep::{preprocess_all, Stopwords};
use spamtax_core::vectorspace::{encode_corpus, CorpusMatrix, Vocabulary};
use spamtax_core::wardcluster::Dendrogram;
use tokio::sync::Mutex;

use crate::error::{ReviewError, Result};
use crate::session::ReviewSession;

/// Immutable inputs of a session.
pub struct Corpus {
    pub docs: Vec<Document>,
    pub matrix: CorpusMatrix,
    pub vocab: Vocabulary,
    pub dendrogram: Dendrogram,
}

impl Corpus {
    pub fn load(session_path: &Path, session: &ReviewSession) -> Result<Self> {
        let resolve = |p: &Path| ReviewSession::resolve(session_path, p);
        let (docs, _) = load_dataset(&resolve(&session.dataset))?;
        let dendrogram = Dendrogram::load(&resolve(&session.dendrogram))?;
        let vocab = Vocabulary::load(&resolve(&session.vocabulary))?;
        if dendrogram.n_leaves != docs.len() {
            return Err(ReviewError::Corrupt(format!(
                "dendrogram has {} leaves but the dataset has {} documents",
                dendrogram.n_leaves,
                docs.len()
            )));
        }
        let tokens = preprocess_all(&docs, &Stopwords::bundled());
        let matrix = encode_corpus(&tokens, &vocab, vocab.scheme());
        Ok(Corpus { docs, matrix, vocab, dendrogram })
    }
}

pub(crate) struct Inner {
    pub corpus: Corpus,
    pub session_path: PathBuf,
    pub snapshot: RwLock<Arc<ReviewSession>>,
    /// Serializes mutations; readers use the last committed snapshot.
    pub writer: Mutex<()>,
}

#[derive(Clone)]
pub struct AppState {
    pub(crate) inner: Arc<Inner>,
}

impl AppState {
    /// Loads and validates a session and everything it references.
    pub fn open(session_path: &Path) -> Result<Self> {
        let session = ReviewSession::load(session_path)?;
        let corpus = Corpus::load(session_path, &session)?;
        session.validate(&corpus.dendrogram)?;
        Ok(AppState {
            inner: Arc::new(Inner {
                corpus,
                session_path: session_path.to_path_buf(),
                snapshot: RwLock::new(Arc::new(session)),
                writer: Mutex::new(()),
            }),
        })
    }

    pub fn session(&self) -> Arc<ReviewSession> {
        Arc::clone(&self.inner.snapshot.read().expect("session lock poisoned"))
    }

    pub fn corpus(&self) -> &Corpus {
        &self.inner.corpus
    }

    /// Applies `f` to a copy of the session, persists it, then publishes it.
    pub(crate) async fn mutate<T>(
        &self,
        f: impl FnOnce(&mut ReviewSession, &Corpus) -> std::result::Result<T, crate::api::ApiError>,
    ) -> std::result::Result<(T, Arc<ReviewSession>), crate::api::ApiError> {
        let _guard = self.inner.writer.lock().await;
        let mut next = (*self.session()).clone();
        let out = f(&mut next, &self.inner.corpus)?;
        next.save(&self.inner.session_path)?;
        let next = Arc::new(next);
        *self.inner.snapshot.write().expect("session lock poisoned") = Arc::clone(&next);
        Ok((out, next))
    }
}
