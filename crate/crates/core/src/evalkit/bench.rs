use std::hint::black_box;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::pipeline::TrainedPipeline;
use crate::textprep::{tokenize, TokenDoc};

/// Mean wall-clock milliseconds per email for preprocess → encode → predict,
/// on the calling thread, after one untimed warm-up pass.
pub fn bench<S: AsRef<str>>(pipeline: &TrainedPipeline, texts: &[S], repetitions: usize) -> Result<f64> {
    if texts.is_empty() {
        return Err(Error::InvalidArgument("cannot benchmark on zero emails".into()));
    }
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
    }
    let run = || -> Result<()> {
        for t in texts {
            let doc = TokenDoc::new("", tokenize(black_box(t.as_ref()), &pipeline.stopwords));
            black_box(pipeline.classify_tokens(&doc)?);
        }
        Ok(())
    };
    run()?;
    let start = Instant::now();
    for _ in 0..repetitions {
        run()?;
    }
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    Ok(elapsed / (texts.len() * repetitions) as f64)
}
