use super::targets::TargetList;
use super::QaError;
use crate::domain::ArtifactRef;
use crate::gateway::templates::bind;
use crate::gateway::{image_ref, parse_judge_triplet, parse_verdict, Gateway, TemplateId};

/// Share of targets the judge sees in the image, and the ones it misses.
/// An empty target list scores 1.
pub fn assess_consistency(
    artifact: &ArtifactRef,
    targets: &TargetList,
    gw: &Gateway,
) -> Result<(f64, Vec<String>), QaError> {
    if targets.is_empty() {
        return Ok((1.0, Vec::new()));
    }
    let image = image_ref(&artifact.0);
    let mut missing = Vec::new();
    for target in targets.as_slice() {
        let ex = gw.complete_template(TemplateId::PresenceQuery, &bind([("image", image.as_str()), ("target", target)]))?;
        match parse_verdict(&ex.response) {
            Some(true) => {}
            Some(false) => missing.push(target.clone()),
            None => return Err(QaError::UnparseableVerdict { target: target.clone(), response: ex.response }),
        }
    }
    let present = targets.len() - missing.len();
    Ok((present as f64 / targets.len() as f64, missing))
}

/// Quality component of the judge triplet, on `[0, 1]`.
pub fn assess_quality(artifact: &ArtifactRef, s_eval: &str, gw: &Gateway) -> Result<f64, QaError> {
    let image = image_ref(&artifact.0);
    let ex = gw.complete_template(TemplateId::JudgeScore, &bind([("image", image.as_str()), ("prompt", s_eval)]))?;
    Ok(parse_judge_triplet(&ex.response)?.1)
}
