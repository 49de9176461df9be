//! Max-Cut QAOA at desk scale: a dense statevector simulator, warm-start
//! initialisation (Goemans-Williamson relaxation, Trotterised-annealing
//! schedules, graph neural networks) and a comparative suite of classical,
//! quantum-aware and neural optimisers.
//!
//! The crate is organised around the pipeline
//! `graphs -> init/gnn -> qsim -> optim/neuralopt`:
//!
//! - [`graphs`]: graph representation, random regular generation, line-graph
//!   operators and a brute-force Max-Cut oracle.
//! - [`qsim`]: statevector simulation of QAOA circuits, cold and warm-started.
//! - [`init`]: TQA schedules, Xavier angle initialisation, the SDP relaxation
//!   with hyperplane rounding, and warm-start regularisation.
//! - [`grad`]: a small reverse-mode autodiff engine over dense real matrices.
//! - [`gnn`]: line graph neural networks and graph convolutional networks
//!   trained unsupervised on the Max-Cut QUBO objective.
//! - [`optim`]: gradient descent variants, Nelder-Mead, quantum natural
//!   gradient, model gradient descent and the SPSA family.
//! - [`neuralopt`]: a PPO reinforcement-learning optimiser and an LSTM
//!   meta-optimiser, both with an SGD hand-off.

pub mod gnn;
pub mod grad;
pub mod graphs;
pub mod init;
pub mod linalg;
pub mod neuralopt;
pub mod optim;
pub mod qsim;
