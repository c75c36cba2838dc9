//! Fit-parameter text block: one `key = value` per line, codes joined with
//! semicolons. Written by `fit`, read back by `compress pack`.

use std::path::Path;

use anyhow::{bail, Context};
use shapefit_core::fit::FitParams;
use shapefit_core::geom::{RotationParams, Vec3};
use shapefit_core::latent::LatentCode;

pub fn params_block(p: &FitParams<f64>) -> String {
    let code = p
        .code
        .iter()
        .map(|v| format!("{v:.17e}"))
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "scale = {:.17e}\npsi = {:.17e}\nrho = {:.17e}\ntheta = {:.17e}\n\
         tx = {:.17e}\nty = {:.17e}\ntz = {:.17e}\nz = {code}\n",
        p.scale, p.rot.psi, p.rot.rho, p.rot.theta,
        p.translation.x, p.translation.y, p.translation.z
    )
}

pub fn read_params(path: &Path) -> anyhow::Result<FitParams<f64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading parameters from {}", path.display()))?;
    let mut scale = None;
    let mut psi = None;
    let mut rho = None;
    let mut theta = None;
    let mut t = [None::<f64>; 3];
    let mut code = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key = value", path.display(), lineno + 1);
        };
        let key = key.trim();
        let value = value.trim();
        let num = || -> anyhow::Result<f64> {
            value
                .parse()
                .with_context(|| format!("{}:{}: bad number {value:?}", path.display(), lineno + 1))
        };
        match key {
            "scale" => scale = Some(num()?),
            "psi" => psi = Some(num()?),
            "rho" => rho = Some(num()?),
            "theta" => theta = Some(num()?),
            "tx" => t[0] = Some(num()?),
            "ty" => t[1] = Some(num()?),
            "tz" => t[2] = Some(num()?),
            "z" => {
                let vals: Result<Vec<f64>, _> =
                    value.split(';').map(|v| v.trim().parse::<f64>()).collect();
                code = Some(vals.with_context(|| {
                    format!("{}:{}: bad code list", path.display(), lineno + 1)
                })?);
            }
            other => bail!("{}:{}: unknown key {other:?}", path.display(), lineno + 1),
        }
    }
    let missing = |what: &str| anyhow::anyhow!("{}: missing key {what}", path.display());
    Ok(FitParams::new(
        scale.ok_or_else(|| missing("scale"))?,
        RotationParams::new(
            psi.ok_or_else(|| missing("psi"))?,
            rho.ok_or_else(|| missing("rho"))?,
            theta.ok_or_else(|| missing("theta"))?,
        ),
        Vec3::of(
            t[0].ok_or_else(|| missing("tx"))?,
            t[1].ok_or_else(|| missing("ty"))?,
            t[2].ok_or_else(|| missing("tz"))?,
        ),
        LatentCode::from_vec(code.ok_or_else(|| missing("z"))?),
    ))
}
