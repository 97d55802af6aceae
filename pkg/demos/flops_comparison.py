"""Cost comparison of encoder/decoder topologies at 800x1280.

Multi-in-multi-out (feature pyramid) pays for its accuracy with a heavy
multi-level decoder; collapsing to single-in-single-out cuts the
post-backbone budget by roughly 20x.
"""

from yolof_assign import (DecoderSpec, EncoderTopology, ImageSize,
                          encoder_decoder_flops)

IMAGE = ImageSize(1280, 800)


def main():
    decoder = DecoderSpec(cls_convs=4, reg_convs=4, channels=256,
                          anchors_per_position=9)
    reports = {}
    for kind in ("mimo", "simo", "miso", "siso"):
        topo = EncoderTopology.by_name(kind, 256)
        reports[kind] = encoder_decoder_flops(topo, decoder, IMAGE)

    print(f"{'topology':<8} {'encoder GFLOPs':>15} {'decoder GFLOPs':>15} "
          f"{'total':>10} {'levels':>18}")
    for kind, rep in reports.items():
        topo = EncoderTopology.by_name(kind, 256)
        print(f"{kind:<8} {rep.encoder_total / 1e9:>15.1f} "
              f"{rep.decoder_total / 1e9:>15.1f} "
              f"{rep.total / 1e9:>10.1f} "
              f"{','.join(topo.output_levels):>18}")

    ratio = reports["mimo"].total / reports["siso"].total
    print(f"\nmimo / siso total ratio: {ratio:.1f}x")


if __name__ == "__main__":
    main()
