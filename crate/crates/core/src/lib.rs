pub mod bench;
pub mod equations;
pub mod graph;
pub mod optimizer;
pub mod pi;
pub mod rng;
pub mod runtime;
pub mod symbol;
pub mod workloads;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    struct Intro;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
    #[doc = include_str!("../../../book/src/modes.md")]
    struct Modes;
    #[doc = include_str!("../../../book/src/csv.md")]
    struct Csv;
    #[doc = include_str!("../../../book/src/edge-list.md")]
    struct EdgeList;
    #[doc = include_str!("../../../book/src/oracle.md")]
    struct Oracle;
}
