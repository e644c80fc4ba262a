use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value as Json};

use wittring::artin_hasse::{hexp_coeffs, hexp_moebius};
use wittring::canonical::{delta, phi, FrobeniusLiftSpec};
use wittring::lambda::{d_operator, lambda_to_witt, lambda_witt_mul, witt_to_lambda, TruncatedSeries};
use wittring::padic::oracle_check;
use wittring::selfcheck;
use wittring::universal::{delta_poly, epsilon_poly, frobenius_poly, structural_poly, witt_polynomial};
use wittring::{Error, GhostVector, Profile, RingDescriptor, RingElement, StructuralKind, UPoly, WittVector};

/// Exact arithmetic with truncated Witt vectors.
#[derive(Parser)]
#[command(name = "witt", version)]
struct Cli {
    /// Print a JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Space {
    /// Coefficient ring, e.g. int, rat, zloc:3, zmod:6, gf:3, gf:2^2:1,1,1, poly:int:u.
    #[arg(long, default_value = "int")]
    ring: String,
    /// Index profile, e.g. full:8, ptyp:2:3, set:1,2,4.
    #[arg(long)]
    profile: String,
}

#[derive(Subcommand)]
enum Command {
    /// Print a universal polynomial.
    #[command(subcommand)]
    Universal(UniversalCmd),
    /// Witt vector sum.
    Add {
        #[command(flatten)]
        space: Space,
        x: String,
        y: String,
    },
    /// Witt vector product.
    Mul {
        #[command(flatten)]
        space: Space,
        x: String,
        y: String,
    },
    /// Additive inverse.
    Neg {
        #[command(flatten)]
        space: Space,
        x: String,
    },
    /// Ghost components.
    Ghost {
        #[command(flatten)]
        space: Space,
        x: String,
    },
    /// Witt vector with the given ghost components.
    Unghost {
        #[command(flatten)]
        space: Space,
        g: String,
    },
    /// Teichmüller representative.
    Teich {
        #[command(flatten)]
        space: Space,
        a: String,
    },
    /// Frobenius F_n.
    Frob {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        n: u64,
        x: String,
    },
    /// Verschiebung V_n from --profile into --target.
    Versch {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        n: u64,
        /// Target profile; defaults to the smallest one containing n * profile.
        #[arg(long)]
        target: Option<String>,
        x: String,
    },
    /// Restriction to a sub-profile.
    Project {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        to: String,
        x: String,
    },
    /// The power-series model 1 + tA[[t]].
    #[command(subcommand)]
    Lambda(LambdaCmd),
    /// Artin-Hasse exponential coefficients.
    Artinhasse {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        terms: usize,
        /// Expand the Moebius product instead of the exponential.
        #[arg(long)]
        moebius: bool,
    },
    /// The map A -> W(A) induced by a family of Frobenius lifts.
    Phi {
        /// id (sigma_p = id on int) or power (sigma_p(u) = u^p on poly:int:u).
        #[arg(long)]
        spec: String,
        #[arg(long)]
        value: String,
        #[arg(long)]
        upto: u64,
    },
    /// The diagonal W_{full:ab} -> W_{full:a}(W_{full:b}).
    Delta {
        #[arg(long, default_value = "int")]
        ring: String,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        x: String,
    },
    /// Compare W_p(F_p) with Z/p^L.
    Oracle {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        len: u32,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Run the identity suite.
    Selfcheck {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Run only the named checks.
        #[arg(long = "check")]
        checks: Vec<String>,
        /// List the check names and exit.
        #[arg(long)]
        list: bool,
        /// Report the running time of each check.
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Subcommand)]
enum UniversalCmd {
    /// S_n
    Sum {
        #[arg(long)]
        n: u64,
    },
    /// Z_n
    Prod {
        #[arg(long)]
        n: u64,
    },
    /// I_n
    Neg {
        #[arg(long)]
        n: u64,
    },
    /// w_n
    Witt {
        #[arg(long)]
        n: u64,
    },
    /// Component m of F_n.
    Frob {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
    /// Component n of eps_p.
    Epsilon {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u64,
    },
    /// Component (n, m) of the diagonal W_{full:ab} -> W_{full:a}(W_{full:b}).
    Delta {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
}

#[derive(Subcommand)]
enum LambdaCmd {
    /// Witt vector to prod (1 - x_n t^n).
    To {
        #[command(flatten)]
        space: Space,
        x: String,
    },
    /// Series to Witt vector.
    From {
        #[arg(long, default_value = "int")]
        ring: String,
        #[arg(long)]
        order: usize,
        f: String,
    },
    /// D f = -t f'/f.
    D {
        #[arg(long, default_value = "int")]
        ring: String,
        #[arg(long)]
        order: usize,
        f: String,
    },
    /// Witt product of two series.
    Mul {
        #[arg(long, default_value = "int")]
        ring: String,
        #[arg(long)]
        order: usize,
        f: String,
        g: String,
    },
}

enum Failure {
    Lib(Error),
    Check(Json, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

struct Output {
    text: String,
    json: Json,
}

fn out(command: &str, text: String, body: Json) -> Output {
    let mut map = Map::new();
    map.insert("schema".into(), json!(1));
    map.insert("command".into(), json!(command));
    if let Json::Object(fields) = body {
        map.extend(fields);
    }
    Output {
        text,
        json: Json::Object(map),
    }
}

fn vector_out(command: &str, v: &WittVector) -> Output {
    out(command, v.to_string(), v.to_json())
}

fn poly_out(kind: &str, poly: &UPoly, params: Json) -> Output {
    let mut body = json!({ "kind": kind, "text": poly.to_string(), "terms": poly.to_json() });
    if let (Json::Object(b), Json::Object(p)) = (&mut body, params) {
        b.extend(p);
    }
    out("universal", poly.to_string(), body)
}

fn series_out(command: &str, f: &TruncatedSeries) -> Output {
    out(command, f.to_string(), f.to_json())
}

impl Space {
    fn parse(&self) -> Result<(RingDescriptor, Profile), Error> {
        Ok((self.ring.parse()?, self.profile.parse()?))
    }

    fn vector(&self, text: &str) -> Result<WittVector, Error> {
        let (ring, profile) = self.parse()?;
        WittVector::parse(&profile, &ring, text)
    }
}

fn run(command: Command) -> Result<Output, Failure> {
    Ok(match command {
        Command::Universal(u) => universal(u)?,
        Command::Add { space, x, y } => vector_out("add", &space.vector(&x)?.add(&space.vector(&y)?)?),
        Command::Mul { space, x, y } => vector_out("mul", &space.vector(&x)?.mul(&space.vector(&y)?)?),
        Command::Neg { space, x } => vector_out("neg", &space.vector(&x)?.neg()?),
        Command::Ghost { space, x } => {
            let g = space.vector(&x)?.ghost();
            out("ghost", g.to_string(), g.to_json())
        }
        Command::Unghost { space, g } => {
            let (ring, profile) = space.parse()?;
            vector_out("unghost", &GhostVector::parse(&profile, &ring, &g)?.unghost()?)
        }
        Command::Teich { space, a } => {
            let (ring, profile) = space.parse()?;
            vector_out("teich", &WittVector::teichmuller(&RingElement::parse(&ring, &a)?, &profile))
        }
        Command::Frob { space, n, x } => vector_out("frob", &space.vector(&x)?.frobenius(n)?),
        Command::Versch { space, n, target, x } => {
            let x = space.vector(&x)?;
            let v = match target {
                Some(t) => x.verschiebung(n, &t.parse()?)?,
                None => x.verschiebung_minimal(n)?,
            };
            vector_out("versch", &v)
        }
        Command::Project { space, to, x } => vector_out("project", &space.vector(&x)?.project(&to.parse()?)?),
        Command::Lambda(l) => lambda(l)?,
        Command::Artinhasse { p, terms, moebius } => {
            let s = if moebius { hexp_moebius(p, terms)? } else { hexp_coeffs(p, terms)? };
            let mut body = s.to_json();
            body["method"] = json!(if moebius { "moebius" } else { "exp" });
            out("artinhasse", s.to_string(), body)
        }
        Command::Phi { spec, value, upto } => {
            let spec: FrobeniusLiftSpec = spec.parse()?;
            let a = RingElement::parse(spec.ring(), &value)?;
            vector_out("phi", &phi(&spec, &a, &Profile::full(upto)?)?)
        }
        Command::Delta { ring, a, b, x } => {
            let ring: RingDescriptor = ring.parse()?;
            let profile = Profile::full(a * b)?;
            let d = delta(&WittVector::parse(&profile, &ring, &x)?, a, b)?;
            out("delta", d.to_string(), d.to_json())
        }
        Command::Oracle { p, len, trials, exhaustive, seed } => {
            let report = oracle_check(p, len, trials, exhaustive, seed)?;
            let mode = if exhaustive { "exhaustive" } else { "random" };
            let summary = format!("p = {p}, L = {len}, {} pairs ({mode})", report.pairs_checked);
            let body = serde_json::to_value(&report).expect("serializable report");
            match &report.counterexample {
                None => out("oracle", format!("pass: {summary}"), body),
                Some(c) => {
                    let text = format!(
                        "fail: {summary}; counterexample {}",
                        serde_json::to_string(c).expect("serializable counterexample")
                    );
                    return Err(Failure::Check(out("oracle", String::new(), body).json, text));
                }
            }
        }
        Command::Selfcheck { trials, seed, checks, list, timings } => {
            if list {
                let names = selfcheck::names();
                return Ok(out("selfcheck", names.join("\n"), json!({ "checks": names })));
            }
            let outcomes = selfcheck::run(&selfcheck::Config { trials, seed }, &checks);
            let passed = outcomes.iter().filter(|o| o.passed).count();
            let mut lines: Vec<String> = outcomes
                .iter()
                .map(|o| match &o.detail {
                    None if timings => format!("ok    {} ({} ms)", o.name, o.millis),
                    None => format!("ok    {}", o.name),
                    Some(d) => format!("FAIL  {}: {d}", o.name),
                })
                .collect();
            lines.push(format!("{passed}/{} checks passed", outcomes.len()));
            let results: Vec<Json> = outcomes
                .iter()
                .map(|o| {
                    let mut r = json!({ "name": o.name, "passed": o.passed, "detail": o.detail });
                    if timings {
                        r["millis"] = json!(o.millis);
                    }
                    r
                })
                .collect();
            let body = json!({ "trials": trials, "seed": seed, "passed": passed == outcomes.len(), "results": results });
            let o = out("selfcheck", lines.join("\n"), body);
            if passed != outcomes.len() {
                return Err(Failure::Check(o.json, o.text));
            }
            o
        }
    })
}

fn universal(cmd: UniversalCmd) -> Result<Output, Error> {
    Ok(match cmd {
        UniversalCmd::Sum { n } => poly_out("sum", &*structural_poly(StructuralKind::Sum, n)?, json!({ "n": n })),
        UniversalCmd::Prod { n } => poly_out("prod", &*structural_poly(StructuralKind::Product, n)?, json!({ "n": n })),
        UniversalCmd::Neg { n } => poly_out("neg", &*structural_poly(StructuralKind::Neg, n)?, json!({ "n": n })),
        UniversalCmd::Witt { n } => {
            if n == 0 {
                return Err(Error::EmptyProfile(0));
            }
            poly_out("witt", &witt_polynomial(n), json!({ "n": n }))
        }
        UniversalCmd::Frob { n, m } => poly_out("frob", &*frobenius_poly(n, m)?, json!({ "n": n, "m": m })),
        UniversalCmd::Epsilon { p, n } => poly_out("epsilon", &*epsilon_poly(p, n)?, json!({ "p": p, "n": n })),
        UniversalCmd::Delta { a, b, n, m } => {
            poly_out("delta", &*delta_poly(a, b, n, m)?, json!({ "a": a, "b": b, "n": n, "m": m }))
        }
    })
}

fn lambda(cmd: LambdaCmd) -> Result<Output, Error> {
    Ok(match cmd {
        LambdaCmd::To { space, x } => series_out("lambda", &witt_to_lambda(&space.vector(&x)?)?),
        LambdaCmd::From { ring, order, f } => {
            let f = TruncatedSeries::parse(&ring.parse()?, order, &f)?;
            vector_out("lambda", &lambda_to_witt(&f)?)
        }
        LambdaCmd::D { ring, order, f } => {
            let f = TruncatedSeries::parse(&ring.parse()?, order, &f)?;
            series_out("lambda", &d_operator(&f)?)
        }
        LambdaCmd::Mul { ring, order, f, g } => {
            let ring: RingDescriptor = ring.parse()?;
            let f = TruncatedSeries::parse(&ring, order, &f)?;
            let g = TruncatedSeries::parse(&ring, order, &g)?;
            series_out("lambda", &lambda_witt_mul(&f, &g)?)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(o) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&o.json).expect("serializable"));
            } else {
                println!("{}", o.text);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Check(body, text)) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
            } else {
                println!("{text}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            let code = if e.is_parse() { 2 } else { 1 };
            if cli.json {
                let kind = if code == 2 { "parse" } else { "domain" };
                let body = json!({ "schema": 1, "error": { "kind": kind, "message": e.to_string() } });
                println!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
            }
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
