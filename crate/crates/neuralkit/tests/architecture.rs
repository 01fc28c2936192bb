use neuralkit::{build_headingnet, HeadingNetConfig, VARIATIONS};

/// Parameter count recomputed from the layer table alone: two identical heads,
/// the fusion stack, and the four fully connected layers.
fn count_from_table(cfg: &HeadingNetConfig) -> usize {
    let conv = |cin: usize, cout: usize, (kh, kw): (usize, usize)| cout * cin * kh * kw + cout;
    let ch = cfg.head_channels;
    let heads: usize = (0..3).map(|i| conv(ch[i], ch[i + 1], cfg.head_kernels[i])).sum::<usize>() * 2;
    let mut cin = ch[3];
    let mut fusion = 0;
    for &k in &cfg.fusion_kernels {
        fusion += conv(cin, cfg.fusion_channels, k);
        cin = cfg.fusion_channels;
    }
    let fc: usize = cfg.fc_dims.windows(2).map(|d| d[0] * d[1] + d[1]).sum();
    heads + fusion + fc
}

#[test]
fn parameter_counts_are_locked() {
    let golden = include_str!("golden/param_counts.txt");
    let mut seen = Vec::new();
    for line in golden.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let mut it = line.split_whitespace();
        let t: u32 = it.next().unwrap().parse().unwrap();
        let n: usize = it.next().unwrap().parse().unwrap();
        let (model, cfg) = build_headingnet(t, 0).unwrap();
        assert_eq!(model.param_count(), n, "HeadingNet{t}");
        assert_eq!(count_from_table(&cfg), n, "HeadingNet{t} table recount");
        seen.push(t);
    }
    assert_eq!(seen, VARIATIONS);
}

#[test]
fn hand_count_for_the_ten_second_net() {
    // heads 2·(336 + 7200 + 20544), fusion 73856, fc 262656 + 65664 + 4128 + 33
    let expected = 2 * (336 + 7200 + 20544) + 73856 + 262656 + 65664 + 4128 + 33;
    assert_eq!(build_headingnet(10, 0).unwrap().0.param_count(), expected);
}

#[test]
fn layer_names_follow_the_graph() {
    let (m, _) = build_headingnet(30, 0).unwrap();
    let names: Vec<&str> = m.params().iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names.first(), Some(&"head1.conv1.weight"));
    assert!(names.contains(&"head2.conv3.bias"));
    assert!(names.contains(&"fusion.conv2.weight"));
    assert_eq!(names.last(), Some(&"fc4.bias"));
    let (m10, _) = build_headingnet(10, 0).unwrap();
    assert!(!m10.params().iter().any(|p| p.name.starts_with("fusion.conv2")));
}
