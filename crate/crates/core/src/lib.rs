pub mod acceptor;
pub mod alphabet;
pub mod bench;
pub mod explain;
pub mod learner;
pub mod lstar;
pub mod ltl;
pub mod sampling;
pub mod verifier;
