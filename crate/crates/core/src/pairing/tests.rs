use super::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn trial_division_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn toy(backend: Backend) -> GroupParams {
    GroupParams::from_primes(big(5), big(7), backend).unwrap()
}

#[test]
fn toy_transparent_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = group_gen(3, Backend::Transparent, &mut rng).unwrap();
    assert_eq!((params.q1.clone(), params.q2.clone()), (big(5), big(7)));
    assert_eq!(params.group.order(), &big(35));
}

#[test]
fn toy_curve_cofactor_scan() {
    // independent scan: smallest l with l*35 - 1 prime and = 3 mod 4
    let l = (1u64..)
        .find(|l| {
            let p = l * 35 - 1;
            p % 4 == 3 && trial_division_prime(p)
        })
        .unwrap();
    assert_eq!((l, l * 35 - 1), (4, 139));

    let params = toy(Backend::CurveA1);
    let (p, cof) = params.group.curve_params().unwrap();
    assert_eq!((p.clone(), cof.clone()), (big(139), big(4)));
}

#[test]
fn lambda_32_primes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = group_gen(32, Backend::Transparent, &mut rng).unwrap();
    let q1: u64 = params.q1.clone().try_into().unwrap();
    let q2: u64 = params.q2.clone().try_into().unwrap();
    assert_ne!(q1, q2);
    assert!(trial_division_prime(q1) && trial_division_prime(q2));
    assert_eq!(q1.leading_zeros(), 32);
    assert_eq!(q2.leading_zeros(), 32);
    assert_eq!(params.group.order(), &(big(q1) * big(q2)));
}

#[test]
fn lambda_below_minimum_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert_eq!(
        group_gen(2, Backend::Transparent, &mut rng),
        Err(PairingError::LambdaTooSmall(2))
    );
}

#[test]
fn exhausted_cofactor_scan_is_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // cofactor 1..=2 can never give p = 3 mod 4 for odd N
    let err = group_gen_with_cap(16, Backend::CurveA1, 2, &mut rng).unwrap_err();
    assert_eq!(err, PairingError::ParameterSearchExhausted { cap: 2 });
}

#[test]
fn generator_acceptance_transparent() {
    let params = toy(Backend::Transparent);
    assert!(params.is_generator(&GElement::Exp(big(2))));
    // 5 has order 7 in Z_35, so 5^{q2} is the identity
    assert!(!params.is_generator(&GElement::Exp(big(5))));
    assert!(!params.is_generator(&GElement::Exp(big(7))));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        match params.random_generator(&mut rng) {
            GElement::Exp(x) => assert!(x.gcd(&big(35)).is_one()),
            _ => unreachable!(),
        }
    }
}

#[test]
fn generator_on_toy_curve_has_order_35() {
    let params = toy(Backend::CurveA1);
    let g = &params.group;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let x = params.random_generator(&mut rng);
        assert_eq!(g.g_pow(&x, &big(35)), g.g_identity());
        assert_ne!(g.g_pow(&x, &big(5)), g.g_identity());
        assert_ne!(g.g_pow(&x, &big(7)), g.g_identity());
        assert_ne!(x, g.g_identity());
    }
}

#[test]
fn pow_examples() {
    let params = toy(Backend::Transparent);
    let g = &params.group;
    assert_eq!(g.g_pow(&GElement::Exp(big(1)), &big(5)), GElement::Exp(big(5)));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [toy(Backend::Transparent), toy(Backend::CurveA1)] {
        let g = &p.group;
        let x = g.random_element(&mut rng);
        assert_eq!(g.g_pow(&x, g.order()), g.g_identity());
        assert_eq!(g.g_pow(&x, &BigUint::zero()), g.g_identity());
        let inv = g.g_pow_signed(&x, &BigInt::from(-1));
        assert_eq!(g.g_mul(&inv, &x), g.g_identity());
    }
}

#[test]
fn transparent_pairing_traces() {
    let params = toy(Backend::Transparent);
    let g = &params.group;
    assert_eq!(
        g.pair(&GElement::Exp(big(5)), &GElement::Exp(big(7))),
        g.gt_identity()
    );
    let u = GElement::Exp(big(3));
    let h = g.g_pow(&u, &params.q2);
    assert_eq!(h, GElement::Exp(big(21)));
    let hh = g.pair(&h, &h);
    assert_eq!(hh, GtElement::Exp(big(21)));
    assert_eq!(g.gt_pow(&hh, &big(10)), g.gt_identity());
}

fn check_pairing_laws(params: &GroupParams, trials: usize, seed: u64) {
    let g = &params.group;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gen = params.random_generator(&mut rng);
    let e_gg = g.pair(&gen, &gen);
    assert_ne!(e_gg, g.gt_identity(), "degenerate on generator");
    assert_eq!(g.gt_pow(&e_gg, g.order()), g.gt_identity());
    let two_three = g.pair(&g.g_pow(&gen, &big(2)), &g.g_pow(&gen, &big(3)));
    assert_eq!(two_three, g.gt_pow(&e_gg, &big(6)));
    for _ in 0..trials {
        let x = g.random_element(&mut rng);
        let y = g.random_element(&mut rng);
        let a = g.random_scalar(&mut rng);
        let b = g.random_scalar(&mut rng);
        let lhs = g.pair(&g.g_pow(&x, &a), &g.g_pow(&y, &b));
        let rhs = g.gt_pow(&g.pair(&x, &y), &((&a * &b) % g.order()));
        assert_eq!(lhs, rhs);
        assert_eq!(g.pair(&x, &y), g.pair(&y, &x), "pairing not symmetric");

        let k = g.random_scalar(&mut rng);
        let j = g.random_scalar(&mut rng);
        let in_q2 = g.g_pow(&gen, &(&params.q1 * &k));
        let in_q1 = g.g_pow(&gen, &(&params.q2 * &j));
        assert_eq!(g.pair(&in_q2, &in_q1), g.gt_identity());
    }
}

#[test]
fn pairing_laws_transparent() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    check_pairing_laws(&toy(Backend::Transparent), 100, 9);
    let params = group_gen(32, Backend::Transparent, &mut rng).unwrap();
    check_pairing_laws(&params, 100, 10);
}

#[test]
fn pairing_laws_toy_curve() {
    check_pairing_laws(&toy(Backend::CurveA1), 100, 11);
}

#[test]
fn pairing_laws_curve_lambda_16() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let params = group_gen(16, Backend::CurveA1, &mut rng).unwrap();
    check_pairing_laws(&params, 30, 13);
}

#[test]
fn pair_product_matches_individual_pairings() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let params = group_gen(16, Backend::CurveA1, &mut rng).unwrap();
    let g = &params.group;
    let xs: Vec<_> = (0..4).map(|_| g.random_element(&mut rng)).collect();
    let ys: Vec<_> = (0..4).map(|_| g.random_element(&mut rng)).collect();
    let product = g.pair_product(xs.iter().zip(ys.iter()));
    let folded = xs
        .iter()
        .zip(&ys)
        .fold(g.gt_identity(), |acc, (x, y)| g.gt_mul(&acc, &g.pair(x, y)));
    assert_eq!(product, folded);
    assert_eq!(g.pair(&g.g_identity(), &xs[0]), g.gt_identity());
}

#[test]
fn canonical_bytes_examples() {
    let params = toy(Backend::Transparent);
    let g = &params.group;
    assert_eq!(g.encode_g(&GElement::Exp(big(21))), vec![0x11, 0x15]);
    assert_eq!(g.encode_gt(&GtElement::Exp(big(21))), vec![0x12, 0x15]);
}

#[test]
fn canonical_bytes_injective_fuzz() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let curve = group_gen(12, Backend::CurveA1, &mut rng).unwrap();
    for params in [toy(Backend::Transparent), toy(Backend::CurveA1), curve] {
        let g = &params.group;
        for _ in 0..10_000 {
            let x = g.random_element(&mut rng);
            let y = g.random_element(&mut rng);
            assert_eq!(g.encode_g(&x) == g.encode_g(&y), x == y);
            assert_eq!(g.encode_g(&x).len(), g.g_encoded_len());
        }
    }
}

#[test]
fn decode_roundtrip_and_rejections() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let params = group_gen(16, Backend::CurveA1, &mut rng).unwrap();
    let g = &params.group;
    for _ in 0..50 {
        let x = g.random_element(&mut rng);
        assert_eq!(g.decode_g(&g.encode_g(&x)).unwrap(), x);
        let t = g.pair(&x, &g.random_element(&mut rng));
        assert_eq!(g.decode_gt(&g.encode_gt(&t)).unwrap(), t);
    }
    assert_eq!(g.decode_g(&g.encode_g(&g.g_identity())).unwrap(), g.g_identity());

    // a point of the full curve group that is not in the order-N subgroup
    let (p, _) = g.curve_params().unwrap();
    let field = PrimeField::new(p.clone());
    let outside = loop {
        let pt = curve::random_point(&field, &mut rng);
        if !curve::mul(&field, &pt, g.order()).is_infinity() {
            break GElement::Curve(pt);
        }
    };
    assert!(g.decode_g(&g.encode_g(&outside)).is_err());
    assert!(g.decode_g(&[0x21]).is_err());

    let t = toy(Backend::Transparent);
    assert!(t.group.decode_g(&[0x11, 35]).is_err());
    assert!(t.group.decode_g(&[0x12, 3]).is_err());
}

#[test]
fn descriptor_roundtrip() {
    let params = toy(Backend::CurveA1);
    let desc = params.group.descriptor();
    assert_eq!(desc.p.as_deref(), Some("139"));
    assert_eq!(Group::from_descriptor(&desc).unwrap(), params.group);
    let json = serde_json::to_string(&desc).unwrap();
    assert!(json.contains("\"backend\":\"curve\""));
}
