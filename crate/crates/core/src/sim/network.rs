use std::collections::VecDeque;

use super::block::DynamicBlock;
use super::rk4::Rk4;
use super::{SimConfig, SimError, Traces};

pub type BlockId = usize;

/// One output port of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortRef {
    pub block: BlockId,
    pub port: usize,
}

/// Collects blocks, wiring and probes before validation.
#[derive(Default)]
pub struct NetworkBuilder {
    blocks: Vec<Box<dyn DynamicBlock>>,
    wiring: Vec<Vec<Option<PortRef>>>,
    probes: Vec<(String, PortRef)>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add<B: DynamicBlock + 'static>(&mut self, block: B) -> BlockId {
        self.add_boxed(Box::new(block))
    }

    pub fn add_boxed(&mut self, block: Box<dyn DynamicBlock>) -> BlockId {
        self.wiring.push(vec![None; block.input_dim()]);
        self.blocks.push(block);
        self.blocks.len() - 1
    }

    /// Output port of `block` by name.
    pub fn port(&self, block: BlockId, name: &str) -> Result<PortRef, SimError> {
        let b = self.blocks.get(block).ok_or_else(|| SimError::Wiring(format!("no block #{block}")))?;
        b.output_names()
            .iter()
            .position(|n| n == name)
            .map(|port| PortRef { block, port })
            .ok_or_else(|| SimError::Wiring(format!("block '{}' has no output '{name}'", b.name())))
    }

    /// Wires `src` into input `input` of `dst`.
    pub fn connect(&mut self, src: PortRef, dst: BlockId, input: usize) -> Result<&mut Self, SimError> {
        let n_src = self
            .blocks
            .get(src.block)
            .ok_or_else(|| SimError::Wiring(format!("no block #{}", src.block)))?
            .output_dim();
        if src.port >= n_src {
            return Err(SimError::Wiring(format!("block #{} has no port {}", src.block, src.port)));
        }
        let slot = self
            .wiring
            .get_mut(dst)
            .and_then(|w| w.get_mut(input))
            .ok_or_else(|| SimError::Wiring(format!("block #{dst} has no input {input}")))?;
        *slot = Some(src);
        Ok(self)
    }

    pub fn probe(&mut self, name: &str, port: PortRef) -> &mut Self {
        self.probes.push((name.to_string(), port));
        self
    }

    /// Probes every output of `block` as `<prefix><output name>`.
    pub fn probe_all(&mut self, prefix: &str, block: BlockId) -> &mut Self {
        let names = self.blocks[block].output_names();
        for (port, n) in names.iter().enumerate() {
            self.probes.push((format!("{prefix}{n}"), PortRef { block, port }));
        }
        self
    }

    pub fn build(self, config: SimConfig) -> Result<Network, SimError> {
        config.validate()?;
        let NetworkBuilder { blocks, wiring, probes } = self;

        let mut out_off = Vec::with_capacity(blocks.len());
        let mut state_off = Vec::with_capacity(blocks.len());
        let (mut no, mut ns) = (0, 0);
        for b in &blocks {
            b.validate(config.dt)?;
            out_off.push(no);
            state_off.push(ns);
            no += b.output_dim();
            ns += b.state_dim();
        }
        let mut inputs = Vec::with_capacity(blocks.len());
        for (i, w) in wiring.iter().enumerate() {
            let mut idx = Vec::with_capacity(w.len());
            for (k, src) in w.iter().enumerate() {
                let src = src.ok_or_else(|| SimError::Unwired {
                    block: blocks[i].name().to_string(),
                    input: k,
                })?;
                idx.push(out_off[src.block] + src.port);
            }
            inputs.push(idx);
        }
        let order = evaluation_order(&blocks, &wiring)?;
        let probe_idx = probes.iter().map(|(_, p)| out_off[p.block] + p.port).collect();
        let mut state = Vec::with_capacity(ns);
        for b in &blocks {
            let x0 = b.initial_state();
            if x0.len() != b.state_dim() {
                return Err(SimError::Config(format!("block '{}' initial state has wrong length", b.name())));
            }
            state.extend(x0);
        }
        let max_in = blocks.iter().map(|b| b.input_dim()).max().unwrap_or(0);
        let dims = blocks
            .iter()
            .map(|b| Dims {
                state: b.state_dim(),
                input: b.input_dim(),
                output: b.output_dim(),
            })
            .collect();
        Ok(Network {
            config,
            eval: Evaluator {
                blocks,
                inputs,
                out_off,
                state_off,
                order,
                scratch: vec![0.0; max_in],
                dims,
            },
            outputs: vec![0.0; no],
            state,
            rk: Rk4::new(ns),
            probe_names: probes.into_iter().map(|(n, _)| n).collect(),
            probe_idx,
        })
    }
}

/// Stateless blocks and blocks without feedthrough first, then feedthrough
/// blocks in dependency order. A cycle through feedthrough blocks is an
/// algebraic loop.
fn evaluation_order(blocks: &[Box<dyn DynamicBlock>], wiring: &[Vec<Option<PortRef>>]) -> Result<Vec<usize>, SimError> {
    let n = blocks.len();
    let ft: Vec<bool> = blocks.iter().map(|b| b.direct_feedthrough()).collect();
    let mut order: Vec<usize> = (0..n).filter(|&i| !ft[i]).collect();
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for (dst, w) in wiring.iter().enumerate() {
        if !ft[dst] {
            continue;
        }
        for src in w.iter().flatten() {
            if ft[src.block] {
                indeg[dst] += 1;
                succ[src.block].push(dst);
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| ft[i] && indeg[i] == 0).collect();
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n)
            .filter(|&i| ft[i] && indeg[i] > 0)
            .map(|i| blocks[i].name().to_string())
            .collect();
        return Err(SimError::AlgebraicLoop(stuck));
    }
    Ok(order)
}

/// Port counts cached at build time; `output_dim` may allocate.
#[derive(Debug, Clone, Copy)]
struct Dims {
    state: usize,
    input: usize,
    output: usize,
}

struct Evaluator {
    dims: Vec<Dims>,
    blocks: Vec<Box<dyn DynamicBlock>>,
    inputs: Vec<Vec<usize>>,
    out_off: Vec<usize>,
    state_off: Vec<usize>,
    order: Vec<usize>,
    scratch: Vec<f64>,
}

impl Evaluator {
    fn gather(&mut self, i: usize, outputs: &[f64]) {
        for (k, &src) in self.inputs[i].iter().enumerate() {
            self.scratch[k] = outputs[src];
        }
    }

    fn outputs(&mut self, t: f64, state: &[f64], outputs: &mut [f64]) {
        for oi in 0..self.order.len() {
            let i = self.order[oi];
            self.gather(i, outputs);
            let d = self.dims[i];
            let (so, oo) = (self.state_off[i], self.out_off[i]);
            let x = &state[so..so + d.state];
            self.blocks[i].output(t, x, &self.scratch[..d.input], &mut outputs[oo..oo + d.output]);
        }
    }

    fn derivatives(&mut self, t: f64, state: &[f64], outputs: &[f64], dx: &mut [f64]) {
        for i in 0..self.blocks.len() {
            let d = self.dims[i];
            if d.state == 0 {
                continue;
            }
            self.gather(i, outputs);
            let so = self.state_off[i];
            self.blocks[i].derivative(t, &state[so..so + d.state], &self.scratch[..d.input], &mut dx[so..so + d.state]);
        }
    }

    fn block_of_state(&self, idx: usize) -> &str {
        let i = (0..self.blocks.len())
            .rev()
            .find(|&j| self.state_off[j] <= idx && self.dims[j].state > 0)
            .unwrap_or(0);
        self.blocks[i].name()
    }

    fn block_of_output(&self, idx: usize) -> &str {
        let i = (0..self.blocks.len())
            .rev()
            .find(|&j| self.out_off[j] <= idx && self.dims[j].output > 0)
            .unwrap_or(0);
        self.blocks[i].name()
    }
}

/// A validated network ready to run on its configured clock.
pub struct Network {
    config: SimConfig,
    eval: Evaluator,
    outputs: Vec<f64>,
    state: Vec<f64>,
    rk: Rk4,
    probe_names: Vec<String>,
    probe_idx: Vec<usize>,
}

impl Network {
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Integrates to the horizon, recording every probe at every grid point.
    pub fn run(mut self) -> Result<Traces, SimError> {
        let dt = self.config.dt;
        let steps = self.config.steps();
        let mut traces = Traces::new(dt, &self.probe_names, steps + 1);
        let mut row = vec![0.0; self.probe_idx.len()];
        for k in 0..=steps {
            let t = k as f64 * dt;
            self.eval.outputs(t, &self.state, &mut self.outputs);
            if let Some(bad) = self.outputs.iter().position(|v| !v.is_finite()) {
                return Err(SimError::NonFinite {
                    block: self.eval.block_of_output(bad).to_string(),
                    t,
                });
            }
            for (r, &i) in row.iter_mut().zip(&self.probe_idx) {
                *r = self.outputs[i];
            }
            traces.push_row(t, &row);
            if k == steps {
                break;
            }
            for i in 0..self.eval.blocks.len() {
                self.eval.gather(i, &self.outputs);
                let so = self.eval.state_off[i];
                let d = self.eval.dims[i];
                self.eval.blocks[i].commit(t, &self.state[so..so + d.state], &self.eval.scratch[..d.input])?;
            }
            let Network { eval, outputs, state, rk, .. } = &mut self;
            rk.step(
                |tt, x, dx| {
                    eval.outputs(tt, x, outputs);
                    eval.derivatives(tt, x, outputs, dx);
                },
                t,
                state,
                dt,
            );
            if let Some(bad) = self.state.iter().position(|v| !v.is_finite()) {
                return Err(SimError::NonFinite {
                    block: self.eval.block_of_state(bad).to_string(),
                    t: t + dt,
                });
            }
        }
        Ok(traces)
    }
}

/// Builds and runs `builder` on `config`.
pub fn run_network(builder: NetworkBuilder, config: SimConfig) -> Result<Traces, SimError> {
    builder.build(config)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::block::{FnMap, FnOde};

    #[test]
    fn algebraic_loop_rejected() {
        let mut nb = NetworkBuilder::new();
        let a = nb.add(FnMap::new("a", 1, &["y"], |_, u, y| y[0] = u[0] + 1.0));
        let b = nb.add(FnMap::new("b", 1, &["y"], |_, u, y| y[0] = 2.0 * u[0]));
        nb.connect(PortRef { block: a, port: 0 }, b, 0).unwrap();
        nb.connect(PortRef { block: b, port: 0 }, a, 0).unwrap();
        let err = nb.build(SimConfig::new(0.1, 1.0, 0)).err().unwrap();
        assert!(matches!(err, SimError::AlgebraicLoop(ref names) if names.len() == 2));
    }

    #[test]
    fn loop_through_state_is_fine() {
        let mut nb = NetworkBuilder::new();
        let x = nb.add(FnOde::new("x", vec![1.0], 1, |_, _, u, dx| dx[0] = u[0]));
        let g = nb.add(FnMap::new("gain", 1, &["y"], |_, u, y| y[0] = -u[0]));
        nb.connect(PortRef { block: x, port: 0 }, g, 0).unwrap();
        nb.connect(PortRef { block: g, port: 0 }, x, 0).unwrap();
        nb.probe("x", PortRef { block: x, port: 0 });
        let tr = run_network(nb, SimConfig::new(1e-3, 1.0, 0)).unwrap();
        let last = *tr.get("x").unwrap().last().unwrap();
        assert!((last - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn unwired_input_rejected() {
        let mut nb = NetworkBuilder::new();
        nb.add(FnOde::new("x", vec![0.0], 1, |_, _, u, dx| dx[0] = u[0]));
        assert!(matches!(nb.build(SimConfig::new(0.1, 1.0, 0)), Err(SimError::Unwired { .. })));
    }

    #[test]
    fn non_finite_names_block() {
        let mut nb = NetworkBuilder::new();
        nb.add(FnOde::new("quiet", vec![0.0], 0, |_, _, _, dx| dx[0] = 0.0));
        nb.add(FnOde::new("boom", vec![1.0], 0, |_, x, _, dx| dx[0] = x[0] * x[0] * 1e10));
        let err = run_network(nb, SimConfig::new(0.01, 10.0, 0)).unwrap_err();
        assert!(matches!(err, SimError::NonFinite { ref block, .. } if block == "boom"));
    }
}
