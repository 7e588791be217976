pub mod acceptance;
pub mod oracles;
