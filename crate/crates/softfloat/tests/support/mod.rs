pub mod gen;
pub mod oracle;
pub mod props;
