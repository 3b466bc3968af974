//! Policy checkpointing: a flat binary format (bit-exact round trips) and a
//! JSON dump of named parameter arrays with shape metadata.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use trefree_core::nn::PolicyNet;

const MAGIC: &[u8; 4] = b"TRFN";
const FORMAT_VERSION: u32 = 1;

/// Binary layout: magic, format version, obs/act/hidden dims (u32 LE),
/// parameter count (u64 LE), then every parameter as f64 LE bits in flat
/// order.
pub fn save_binary(net: &PolicyNet, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let dims = net.dims();
    file.write_all(MAGIC)?;
    file.write_all(&FORMAT_VERSION.to_le_bytes())?;
    file.write_all(&(dims.obs_dim as u32).to_le_bytes())?;
    file.write_all(&(dims.act_dim as u32).to_le_bytes())?;
    file.write_all(&(dims.hidden_dim as u32).to_le_bytes())?;
    let params = net.flat_params();
    file.write_all(&(params.len() as u64).to_le_bytes())?;
    for p in &params {
        file.write_all(&p.to_bits().to_le_bytes())?;
    }
    Ok(())
}

pub fn load_binary(path: &Path) -> Result<PolicyNet> {
    let mut file = std::fs::File::open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        bail!("{}: not a policy checkpoint", path.display());
    }
    let mut u32buf = [0u8; 4];
    file.read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != FORMAT_VERSION {
        bail!("{}: unsupported checkpoint version {version}", path.display());
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        file.read_exact(&mut u32buf)?;
        *d = u32::from_le_bytes(u32buf) as usize;
    }
    let mut u64buf = [0u8; 8];
    file.read_exact(&mut u64buf)?;
    let count = u64::from_le_bytes(u64buf) as usize;
    let mut net = PolicyNet::zeros(dims[0], dims[1], dims[2]);
    if count != net.param_count() {
        bail!("{}: parameter count mismatch", path.display());
    }
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        file.read_exact(&mut u64buf)?;
        params.push(f64::from_bits(u64::from_le_bytes(u64buf)));
    }
    net.set_flat_params(&params)?;
    Ok(net)
}

#[derive(Serialize, Deserialize)]
struct JsonTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct JsonCheckpoint {
    format: String,
    obs_dim: usize,
    act_dim: usize,
    hidden_dim: usize,
    tensors: Vec<(String, JsonTensor)>,
}

pub fn save_json(net: &PolicyNet, path: &Path) -> Result<()> {
    let flat = net.flat_params();
    let mut at = 0usize;
    let tensors = net
        .tensor_specs()
        .into_iter()
        .map(|(name, shape)| {
            let len = shape.iter().product::<usize>().max(1);
            let data = flat[at..at + len].to_vec();
            at += len;
            (name.to_string(), JsonTensor { shape, data })
        })
        .collect();
    let dims = net.dims();
    let doc = JsonCheckpoint {
        format: "trefree-policy".to_string(),
        obs_dim: dims.obs_dim,
        act_dim: dims.act_dim,
        hidden_dim: dims.hidden_dim,
        tensors,
    };
    std::fs::write(path, serde_json::to_string_pretty(&doc)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn load_json(path: &Path) -> Result<PolicyNet> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let doc: JsonCheckpoint = serde_json::from_str(&text)?;
    if doc.format != "trefree-policy" {
        bail!("{}: unknown checkpoint format '{}'", path.display(), doc.format);
    }
    let mut net = PolicyNet::zeros(doc.obs_dim, doc.act_dim, doc.hidden_dim);
    let expected = net.tensor_specs();
    if doc.tensors.len() != expected.len() {
        bail!("{}: tensor list mismatch", path.display());
    }
    let mut flat = Vec::with_capacity(net.param_count());
    for ((name, tensor), (want_name, want_shape)) in doc.tensors.iter().zip(expected) {
        if name != want_name || tensor.shape != want_shape {
            bail!("{}: unexpected tensor '{name}'", path.display());
        }
        flat.extend_from_slice(&tensor.data);
    }
    net.set_flat_params(&flat)?;
    Ok(net)
}
