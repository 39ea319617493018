//! Command-line front end: keygen, embed, extract, capacity, inspect.
//!
//! Data flows through files or stdin/stdout (`-`); diagnostics go to stderr
//! so piped stego bytes and recovered messages stay clean. Exit codes: 0 on
//! success, 1 for domain and I/O errors, 2 for usage errors (via clap).

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use css_stego::css::{self, StegoParams};
use css_stego::keyfile::{self, KeyFile};
use css_stego::pipeline;
use css_stego::rsa::{self, ExponentPolicy, RsaPrivateKey, RsaPublicKey};

#[derive(Parser)]
#[command(
    name = "css-stego",
    version,
    about = "Hide RSA-encrypted messages in the trailing whitespace of CSS files",
    after_help = "The --k value must match between embed and extract. \
                  Keys use raw textbook RSA: fine for hiding, not for secrets."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum ExponentArg {
    /// 65537 when valid for the key size, else the smallest workable odd e.
    #[default]
    Fixed,
    /// Uniform odd e in (1, phi), redrawn until coprime.
    Random,
}

impl From<ExponentArg> for ExponentPolicy {
    fn from(arg: ExponentArg) -> Self {
        match arg {
            ExponentArg::Fixed => ExponentPolicy::Fixed,
            ExponentArg::Random => ExponentPolicy::Random,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair and write <prefix>.pub and <prefix>.priv
    Keygen {
        /// Bits per prime (the modulus gets roughly twice this)
        #[arg(long, default_value_t = rsa::DEFAULT_PRIME_BITS,
              value_parser = clap::value_parser!(u32).range(8..=4096))]
        bits: u32,
        /// Seed for reproducible keys; omit to use system entropy
        #[arg(long)]
        seed: Option<u64>,
        /// Public exponent policy
        #[arg(long, value_enum, default_value_t)]
        exponent: ExponentArg,
        /// Output path prefix
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a message and embed it into a CSS cover
    Embed {
        /// Cover stylesheet
        cover: PathBuf,
        /// Message file, or - for stdin
        #[arg(long, default_value = "-")]
        message: String,
        /// Public key file
        #[arg(long)]
        key: PathBuf,
        /// Bits per anchor semicolon
        #[arg(long, default_value_t = 8,
              value_parser = clap::value_parser!(u32).range(1..=64))]
        k: u32,
        /// Stego output file, or - for stdout
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Extract and decrypt the hidden message from a stego CSS file
    Extract {
        /// Stego stylesheet, or - for stdin
        stego: String,
        /// Private key file
        #[arg(long)]
        key: PathBuf,
        /// Bits per anchor semicolon (must match the embed side)
        #[arg(long, default_value_t = 8,
              value_parser = clap::value_parser!(u32).range(1..=64))]
        k: u32,
        /// Message output file, or - for stdout
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Report how much a cover can carry
    Capacity {
        /// Cover stylesheet
        cover: PathBuf,
        /// Bits per anchor semicolon
        #[arg(long, default_value_t = 8,
              value_parser = clap::value_parser!(u32).range(1..=64))]
        k: u32,
        /// Also report the message budget for keys of this modulus width
        #[arg(long, value_parser = clap::value_parser!(u32).range(9..))]
        modulus_bits: Option<u32>,
    },
    /// Show every anchor and its trailing run with visible glyphs
    Inspect {
        /// Stylesheet to inspect
        file: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        match err.downcast_ref::<css_stego::Error>() {
            Some(domain) => eprintln!("error ({} layer): {domain}", domain.layer()),
            None => eprintln!("error: {err:#}"),
        }
        process::exit(1);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Keygen {
            bits,
            seed,
            exponent,
            out,
        } => cmd_keygen(bits, seed, exponent.into(), &out),
        Command::Embed {
            cover,
            message,
            key,
            k,
            out,
        } => cmd_embed(&cover, &message, &key, k, &out),
        Command::Extract { stego, key, k, out } => cmd_extract(&stego, &key, k, &out),
        Command::Capacity {
            cover,
            k,
            modulus_bits,
        } => cmd_capacity(&cover, k, modulus_bits),
        Command::Inspect { file } => cmd_inspect(&file),
    }
}

fn read_input(spec: &str) -> Result<Vec<u8>> {
    if spec == "-" {
        let mut buf = Vec::new();
        io::stdin()
            .lock()
            .read_to_end(&mut buf)
            .context("reading stdin")?;
        Ok(buf)
    } else {
        fs::read(spec).with_context(|| format!("reading {spec}"))
    }
}

fn write_output(spec: &str, bytes: &[u8]) -> Result<()> {
    if spec == "-" {
        io::stdout()
            .lock()
            .write_all(bytes)
            .context("writing stdout")
    } else {
        fs::write(spec, bytes).with_context(|| format!("writing {spec}"))
    }
}

fn load_public_key(path: &Path) -> Result<RsaPublicKey> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match keyfile::parse(&text)? {
        KeyFile::Public(key) => Ok(key),
        KeyFile::Private(_) => bail!("{} holds a private key, expected kind pub", path.display()),
    }
}

fn load_private_key(path: &Path) -> Result<RsaPrivateKey> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match keyfile::parse(&text)? {
        KeyFile::Private(key) => Ok(key),
        KeyFile::Public(_) => bail!("{} holds a public key, expected kind priv", path.display()),
    }
}

fn print_warnings(doc: &css::CssDocument) {
    for warning in doc.warnings() {
        eprintln!("warning: {warning}; anchors past it are not used");
    }
}

fn cmd_keygen(bits: u32, seed: Option<u64>, policy: ExponentPolicy, out: &Path) -> Result<()> {
    let pair = rsa::generate_keypair(bits, policy, seed);
    let pub_path = PathBuf::from(format!("{}.pub", out.display()));
    let priv_path = PathBuf::from(format!("{}.priv", out.display()));
    fs::write(&pub_path, keyfile::encode_public(&pair.public))
        .with_context(|| format!("writing {}", pub_path.display()))?;
    fs::write(&priv_path, keyfile::encode_private(&pair.private))
        .with_context(|| format!("writing {}", priv_path.display()))?;
    println!("modulus: {} bits", pair.public.modulus_bits());
    println!("public key:  {}", pub_path.display());
    println!("private key: {}", priv_path.display());
    Ok(())
}

fn cmd_embed(cover: &Path, message: &str, key: &Path, k: u32, out: &str) -> Result<()> {
    let cover_bytes = fs::read(cover).with_context(|| format!("reading {}", cover.display()))?;
    let message_bytes = read_input(message)?;
    let public = load_public_key(key)?;
    let params = StegoParams::new(k)?;

    print_warnings(&css::scan(&cover_bytes));
    let (stego, report) = pipeline::embed_message(&cover_bytes, &message_bytes, &public, &params)?;
    write_output(out, &stego)?;
    eprintln!(
        "embedded {} bits into {} of {} anchors (channel capacity {} bits)",
        report.payload_bits, report.anchors_used, report.anchors_total, report.capacity_bits
    );
    Ok(())
}

fn cmd_extract(stego: &str, key: &Path, k: u32, out: &str) -> Result<()> {
    let stego_bytes = read_input(stego)?;
    let private = load_private_key(key)?;
    let params = StegoParams::new(k)?;
    let message = pipeline::extract_message(&stego_bytes, &private, &params)?;
    write_output(out, &message)?;
    eprintln!("recovered {} bytes", message.len());
    Ok(())
}

fn cmd_capacity(cover: &Path, k: u32, modulus_bits: Option<u32>) -> Result<()> {
    let bytes = fs::read(cover).with_context(|| format!("reading {}", cover.display()))?;
    let params = StegoParams::new(k)?;
    let doc = css::canonicalize(&css::scan(&bytes));
    print_warnings(&doc);

    let anchors = doc.anchors().len() as u64;
    let channel = anchors * k as u64;
    println!("anchors: {anchors}");
    println!("channel bits (k={k}): {channel}");
    println!("payload bits after header: {}", css::capacity(&doc, &params));
    if let Some(mb) = modulus_bits {
        println!(
            "max message bytes at {mb}-bit modulus: {}",
            pipeline::max_message_bytes(channel, mb)
        );
    }
    Ok(())
}

fn cmd_inspect(file: &Path) -> Result<()> {
    let bytes = fs::read(file).with_context(|| format!("reading {}", file.display()))?;
    let doc = css::scan(&bytes);
    print_warnings(&doc);

    let mut total_bits = 0usize;
    for anchor in doc.anchors() {
        let line = 1 + bytes[..anchor.semicolon_offset]
            .iter()
            .filter(|&&b| b == b'\n')
            .count();
        let start = anchor.semicolon_offset + 1;
        let run = &bytes[start..start + anchor.existing_trailing];
        if run.is_empty() {
            println!("line {line:>5}: (empty)");
            continue;
        }
        let glyphs: String = run
            .iter()
            .map(|&b| if b == 0x20 { '·' } else { '→' })
            .collect();
        let decoded = css_stego::bits::whitespace_to_bits(run)?;
        let bits: String = decoded.iter().map(|b| if b { '1' } else { '0' }).collect();
        total_bits += decoded.len();
        println!("line {line:>5}: {glyphs}  bits {bits}");
    }
    println!("{} anchors, {} hidden bits", doc.anchors().len(), total_bits);
    Ok(())
}
