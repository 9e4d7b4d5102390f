//! The `pw` command-line tool.
//!
//! Every verb reads its inputs from flags and/or a JSON request file and
//! writes one JSON object. Exit codes: 0 on success, 2 for invalid input or
//! a mathematically impossible request, 3 when precision runs out or a
//! certificate cannot be established.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};

use pw_core::adelic::{adelic_ordering, conjugate_poly, scale_into_z, QpBall};
use pw_core::approx::{approximate, ApproxRequest};
use pw_core::globalbasis::{char_ideal, global_membership, regular_basis, CharOutcome};
use pw_core::mahler::{expand, sup_norm_data, StepFunction};
use pw_core::padic::default_precision;
use pw_core::pordering::{local_membership, p_ordering};
use pw_core::{AdelicSet, CompactSet, DefaultFamily, Error, Rat, RatPoly};

#[derive(Parser, Debug)]
#[command(name = "pw", version, about = "Integer-valued polynomials, p-orderings and adelic approximation")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Working p-adic precision (digits); defaults to $PW_PRECISION or 32.
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// JSON file holding the request; flags override its fields.
    #[arg(long, global = true)]
    request: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Greedy p-ordering of a compact set.
    Ordering {
        #[arg(long)]
        set: Option<String>,
        /// Number of points.
        #[arg(long)]
        length: Option<usize>,
    },
    /// Characteristic ideal I_n of an adelic set.
    Charideal {
        #[arg(long)]
        adelic: Option<String>,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Regular basis up to a degree.
    Basis {
        #[arg(long)]
        adelic: Option<String>,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Integer-valuedness of a polynomial on an adelic set (or one compact set).
    Member {
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        adelic: Option<String>,
        #[arg(long)]
        set: Option<String>,
    },
    /// Expansion of a step function in the ordering basis.
    Expand {
        #[arg(long)]
        set: Option<String>,
        /// Tabulate this polynomial instead of reading a table.
        #[arg(long)]
        poly: Option<String>,
        /// Residue depth m of the tabulated polynomial.
        #[arg(long)]
        modulus: Option<u32>,
    },
    /// Simultaneous approximation at several primes.
    Approx,
    /// Adelic ordering of an adelic set.
    AdelicOrdering {
        #[arg(long)]
        adelic: Option<String>,
        /// Number of points.
        #[arg(long)]
        length: Option<usize>,
    },
    /// Scale a bounded set into the profinite integers.
    Scale {
        #[arg(long)]
        poly: Option<String>,
    },
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok(value) => {
            let text = serde_json::to_string(&value).expect("JSON values serialize") + "\n";
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        report(stderr, "Io", &e.to_string());
                        return 2;
                    }
                }
                None => {
                    let _ = stdout.write_all(text.as_bytes());
                }
            }
            0
        }
        Err(Failure::Core(e)) => {
            report(stderr, &kind(&e), &e.to_string());
            if e.is_precision_failure() {
                3
            } else {
                2
            }
        }
        Err(Failure::Input(msg)) => {
            report(stderr, "Invalid", &msg);
            2
        }
    }
}

fn report(stderr: &mut dyn Write, kind: &str, message: &str) {
    let v = json!({ "error": kind, "message": message });
    let _ = writeln!(stderr, "{v}");
}

fn kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

enum Failure {
    Core(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Request(serde_json::Map<String, Value>);

impl Request {
    fn load(path: Option<&PathBuf>) -> Outcome<Request> {
        let Some(path) = path else { return Ok(Request(Default::default())) };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(m)) => Ok(Request(m)),
            Ok(_) => Err(Failure::Input("request must be a JSON object".into())),
            Err(e) => Err(Failure::Input(format!("request is not valid JSON: {e}"))),
        }
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    fn usize(&self, flag: Option<usize>, key: &str) -> Outcome<usize> {
        if let Some(v) = flag {
            return Ok(v);
        }
        self.get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| Failure::Input(format!("missing --{key}")))
    }

    fn string(&self, flag: &Option<String>, key: &str) -> Option<Value> {
        flag.clone().map(Value::String).or_else(|| self.get(key).cloned())
    }
}

fn need(v: Option<Value>, key: &str) -> Outcome<Value> {
    v.ok_or_else(|| Failure::Input(format!("missing --{key}")))
}

fn parse_set(v: Value) -> Outcome<CompactSet> {
    Ok(match v {
        Value::String(s) => s.parse()?,
        other => serde_json::from_value(other).map_err(|e| Failure::Input(format!("bad set: {e}")))?,
    })
}

fn parse_adelic(v: Value) -> Outcome<AdelicSet> {
    Ok(match v {
        Value::String(s) => s.parse()?,
        other => serde_json::from_value(other).map_err(|e| Failure::Input(format!("bad adelic set: {e}")))?,
    })
}

fn parse_poly(v: Value) -> Outcome<RatPoly> {
    Ok(match v {
        Value::String(s) => s.parse()?,
        other => serde_json::from_value(other).map_err(|e| Failure::Input(format!("bad polynomial: {e}")))?,
    })
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn execute(cli: &Cli) -> Outcome<Value> {
    let req = Request::load(cli.request.as_ref())?;
    let precision = match cli.precision {
        Some(0) => return Err(Failure::Input("--precision must be positive".into())),
        Some(n) => n,
        None => req.get("N").and_then(Value::as_u64).map_or_else(default_precision, |n| n as u32),
    };
    match &cli.verb {
        Verb::Ordering { set, length } => {
            let s = parse_set(need(req.string(set, "set"), "set")?)?;
            let len = req.usize(*length, "length")?;
            if len == 0 {
                return Err(Failure::Input("--length must be at least 1".into()));
            }
            let o = p_ordering(&s, len - 1, precision)?;
            let points: Vec<Value> = o.residues().iter().map(|r| num(r.residue())).collect();
            Ok(json!({ "p": o.prime(), "points": points, "w": o.w(), "N": o.precision() }))
        }
        Verb::Charideal { adelic, degree } => {
            let a = parse_adelic(need(req.string(adelic, "adelic"), "adelic")?)?;
            let n = req.usize(*degree, "degree")?;
            let c = char_ideal(&a, n, precision)?;
            Ok(match c.outcome {
                CharOutcome::Fractional { denominator, factors } => json!({
                    "degree": n,
                    "outcome": "Fractional",
                    "D": num(&denominator),
                    "factors": factors.iter().map(|(p, e)| (p.to_string(), json!(e))).collect::<serde_json::Map<_, _>>(),
                }),
                CharOutcome::NotFinitelyGenerated { witness } => json!({
                    "degree": n,
                    "outcome": "NotFinitelyGenerated",
                    "witness": witness,
                }),
            })
        }
        Verb::Basis { adelic, degree } => {
            let a = parse_adelic(need(req.string(adelic, "adelic"), "adelic")?)?;
            let d = req.usize(*degree, "degree")?;
            let b = regular_basis(&a, d, precision)?;
            let text: Vec<String> = b.polys.iter().map(ToString::to_string).collect();
            Ok(json!({
                "set": a.to_string(),
                "degree": d,
                "polys": to_value(&b.polys),
                "text": text,
                "certified_depth": to_value(&b.certified_depth),
            }))
        }
        Verb::Member { poly, adelic, set } => {
            let f = parse_poly(need(req.string(poly, "poly"), "poly")?)?;
            let member = match (req.string(adelic, "adelic"), req.string(set, "set")) {
                (Some(a), None) => global_membership(&f, &parse_adelic(a)?, precision)?,
                (None, Some(s)) => local_membership(&f, &parse_set(s)?, precision)?,
                _ => return Err(Failure::Input("give exactly one of --adelic or --set".into())),
            };
            Ok(json!({ "member": member }))
        }
        Verb::Expand { set, poly, modulus } => {
            let (phi, n) = match (req.string(poly, "poly"), req.get("function")) {
                (Some(f), None) => {
                    let s = parse_set(need(req.string(set, "set"), "set")?)?;
                    let m = modulus.or_else(|| req.get("m").and_then(Value::as_u64).map(|m| m as u32)).unwrap_or(precision);
                    let f = parse_poly(f)?;
                    let phi = StepFunction::sample(&s, m, precision, |r| f.eval(&Rat::from(r.clone())))?;
                    (phi, precision)
                }
                (None, Some(func)) => {
                    let phi: StepFunction = serde_json::from_value(func.clone())
                        .map_err(|e| Failure::Input(format!("bad step function: {e}")))?;
                    let n = cli.precision.unwrap_or(phi.precision());
                    (phi, n)
                }
                (None, None) if req.get("table").is_some() => {
                    let phi: StepFunction = serde_json::from_value(Value::Object(req.0.clone()))
                        .map_err(|e| Failure::Input(format!("bad step function: {e}")))?;
                    let n = cli.precision.unwrap_or(phi.precision());
                    (phi, n)
                }
                _ => return Err(Failure::Input("give --poly with --set, or a step function in --request".into())),
            };
            let o = p_ordering(phi.domain(), 0, n)?;
            let s = expand(&phi, &o, n)?;
            let sn = sup_norm_data(&s, &phi)?;
            let mut v = to_value(&s);
            v["sup_norm"] = to_value(&sn);
            Ok(v)
        }
        Verb::Approx => {
            let mut body = req.0.clone();
            if let Some(Value::String(s)) = body.get("set") {
                let a: AdelicSet = s.parse()?;
                body.insert("set".into(), to_value(&a));
            }
            let r: ApproxRequest = serde_json::from_value(Value::Object(body))
                .map_err(|e| Failure::Input(format!("bad approximation request: {e}")))?;
            let cert = approximate(&r, precision)?;
            Ok(json!({
                "poly": to_value(&cert.poly),
                "text": cert.poly.to_string(),
                "certificate": {
                    "degree": cert.degree,
                    "closeness": to_value(&cert.closeness),
                    "member": cert.member,
                    "N": cert.precision,
                },
            }))
        }
        Verb::AdelicOrdering { adelic, length } => {
            let a = parse_adelic(need(req.string(adelic, "adelic"), "adelic")?)?;
            let len = req.usize(*length, "length")?;
            Ok(to_value(&adelic_ordering(&a, len, precision)?))
        }
        Verb::Scale { poly } => {
            let default = match req.get("default") {
                None => DefaultFamily::Full,
                Some(v) => serde_json::from_value(v.clone()).map_err(|e| Failure::Input(format!("bad default: {e}")))?,
            };
            let comps = parse_components(req.get("components"))?;
            let (d, set) = scale_into_z(default, &comps)?;
            let mut out = json!({ "d": num(&d), "set": to_value(&set), "text": set.to_string() });
            if let Some(f) = req.string(poly, "poly") {
                let f = parse_poly(f)?;
                let d1 = match req.get("d1") {
                    None => BigUint::from(1u32),
                    Some(v) => v.to_string().parse().map_err(|_| Failure::Input("d1 must be a positive integer".into()))?,
                };
                let g = conjugate_poly(&f, &d, &d1)?;
                out["conjugate"] = to_value(&g);
                out["conjugate_text"] = Value::String(g.to_string());
            }
            Ok(out)
        }
    }
}

fn parse_components(v: Option<&Value>) -> Outcome<BTreeMap<u64, Vec<QpBall>>> {
    let mut out = BTreeMap::new();
    let Some(v) = v else { return Ok(out) };
    let obj = v.as_object().ok_or_else(|| Failure::Input("components must map primes to ball lists".into()))?;
    for (p, balls) in obj {
        let p: u64 = p.parse().map_err(|_| Failure::Input(format!("bad prime {p:?}")))?;
        let list = balls.as_array().ok_or_else(|| Failure::Input("balls must be a list".into()))?;
        let mut parsed = Vec::new();
        for b in list {
            let center = match b.get("center") {
                Some(Value::String(s)) => s.parse::<Rat>()?,
                Some(other) => serde_json::from_value(other.clone())
                    .or_else(|_| other.to_string().parse::<Rat>())
                    .map_err(|_| Failure::Input("bad ball center".into()))?,
                None => return Err(Failure::Input("ball needs a center".into())),
            };
            let exp = b
                .get("exp")
                .and_then(|e| e.to_string().parse::<i64>().ok())
                .ok_or_else(|| Failure::Input("ball needs an integer exp".into()))?;
            parsed.push(QpBall::new(center, exp));
        }
        out.insert(p, parsed);
    }
    Ok(out)
}

fn num(n: &BigUint) -> Value {
    Value::Number(n.to_string().parse().expect("integers are JSON numbers"))
}
