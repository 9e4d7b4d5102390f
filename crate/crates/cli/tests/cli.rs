use serde_json::Value;

use pw_core::{Rat, RatPoly};

fn pw(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pw").chain(args.iter().copied());
    let code = pw_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok_json(args: &[&str]) -> Value {
    let (code, out, err) = pw(args);
    assert_eq!(code, 0, "stderr: {err}");
    serde_json::from_str(&out).unwrap()
}

fn request(body: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), body).unwrap();
    f
}

#[test]
fn ordering_of_two_balls() {
    let v = ok_json(&["ordering", "--set", "p=2; balls: 0+p^1, 1+p^1", "--length", "4"]);
    assert_eq!(v["points"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(v["w"], serde_json::json!([0, 0, 1, 1]));
    assert_eq!(v["p"], 2);
}

#[test]
fn charideal_of_full_set() {
    let v = ok_json(&["charideal", "--adelic", "default=Zp", "--degree", "4"]);
    assert_eq!(v["D"], 24);
    let v = ok_json(&["charideal", "--adelic", "default=pZp", "--degree", "1"]);
    assert_eq!(v["outcome"], "NotFinitelyGenerated");
}

#[test]
fn binomial_is_member() {
    let v = ok_json(&["member", "--poly", "1/2*x^2-1/2*x", "--adelic", "default=Zp"]);
    assert_eq!(v, serde_json::json!({"member": true}));
    let v = ok_json(&["member", "--poly", "1/3*x", "--set", "p=3; balls: 0+p^1"]);
    assert_eq!(v["member"], true);
}

#[test]
fn basis_round_trips() {
    let v = ok_json(&["basis", "--adelic", "default=Zp", "--degree", "4"]);
    let polys: Vec<RatPoly> = serde_json::from_value(v["polys"].clone()).unwrap();
    for (n, f) in polys.iter().enumerate() {
        assert_eq!(f.degree_or_zero(), n);
    }
    assert_eq!(polys[4].leading(), Rat::new(1, 24).unwrap());
    let text: Vec<String> = serde_json::from_value(v["text"].clone()).unwrap();
    let reparsed: Vec<RatPoly> = text.iter().map(|t| t.parse().unwrap()).collect();
    assert_eq!(reparsed, polys);
}

#[test]
fn output_is_deterministic() {
    let args = ["basis", "--adelic", "default=Zp; p=2; balls: 1+p^2; p=5; balls: 0+p^1", "--degree", "5"];
    let (_, a, _) = pw(&args);
    let (_, b, _) = pw(&args);
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    let (code, _, err) = pw(&["ordering", "--set", "p=4; balls: 0+p^0", "--length", "2"]);
    assert_eq!(code, 2);
    let diag: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(diag["error"], "NotPrime");
    let (code, _, err) = pw(&["ordering", "--set", "p=2; balls: 0+p^0", "--length", "9", "--precision", "3"]);
    assert_eq!(code, 3);
    assert!(err.contains("PrecisionExhausted"));
    let (code, _, _) = pw(&["adelic-ordering", "--adelic", "default=pZp", "--length", "2"]);
    assert_eq!(code, 2);
    let (code, _, _) = pw(&["nonsense"]);
    assert_eq!(code, 2);
}

#[test]
fn expand_from_request() {
    let f = request(
        r#"{"function": {"p":2,"set":{"p":2,"balls":[{"center":0,"exp":0}]},"m":1,"N":4,"table":{"0":0,"1":1}}}"#,
    );
    let v = ok_json(&["expand", "--request", f.path().to_str().unwrap()]);
    assert_eq!(v["certified"], true);
    let coeffs: Vec<u64> = serde_json::from_value(v["coeffs"].clone()).unwrap();
    // forward differences of 0,1,0,1,... reduced mod 16
    assert_eq!(&coeffs[..5], &[0, 1, 14, 4, 8]);
    assert_eq!(v["sup_norm"]["coeffs"], v["sup_norm"]["values"]);
}

#[test]
fn approx_from_request() {
    let f = request(
        r#"{"set": "default=Zp",
            "targets": {
              "2": {"k": 3, "function": {"p":2,"set":{"p":2,"balls":[{"center":0,"exp":0}]},"m":2,"N":3,"table":{"0":5,"1":0,"2":7,"3":1}}},
              "3": {"k": 2, "function": {"p":3,"set":{"p":3,"balls":[{"center":0,"exp":0}]},"m":1,"N":2,"table":{"0":2,"1":2,"2":4}}}
            }}"#,
    );
    let v = ok_json(&["approx", "--request", f.path().to_str().unwrap()]);
    let poly: RatPoly = v["text"].as_str().unwrap().parse().unwrap();
    let want2 = [5i64, 0, 7, 1];
    let want3 = [2i64, 2, 4];
    for x in 0..144i64 {
        let y = poly.eval(&Rat::from(x));
        assert!(y.is_integer());
        assert!((&y - &Rat::from(want2[(x % 4) as usize])).valp(2) >= pw_core::Valuation::Finite(3));
        assert!((&y - &Rat::from(want3[(x % 3) as usize])).valp(3) >= pw_core::Valuation::Finite(2));
    }
    assert_eq!(v["certificate"]["member"], true);
}

#[test]
fn adelic_ordering_and_scale() {
    let v = ok_json(&["adelic-ordering", "--adelic", "default=Zp", "--length", "5"]);
    assert_eq!(v["exceptions"][4], serde_json::json!([2, 3]));
    let f = request(r#"{"components": {"2": [{"center": "1/2", "exp": 1}], "3": [{"center": "1/9", "exp": 1}]}, "poly": "x+1", "d1": 2}"#);
    let v = ok_json(&["scale", "--request", f.path().to_str().unwrap()]);
    assert_eq!(v["d"], 18);
    assert_eq!(v["conjugate_text"], "9*x+1/2");
}

#[test]
fn out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("o.json");
    let (code, out, _) = pw(&["charideal", "--adelic", "default=Zp", "--degree", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["D"], 6);
}
