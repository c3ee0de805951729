"""Convert scikit-image's bundled photographs into 512x512 PGM files.

Plain images are written as 8-bit PGM. With --whiten the images are passed
through the sparse-coding whitening filter |f| exp(-(|f|/f0)^4), f0 = 0.4 N,
scaled to unit pixel variance and stored as 16-bit PGM covering +-8 sigma,
so a loaded value v decodes to 16 v - 8. --sct additionally writes the
decoded stack as a single HxWxC float tensor.
"""

import argparse
import pathlib
import struct

import numpy as np
from skimage import color, data

NAMES = ("camera", "astronaut", "grass", "gravel", "brick", "moon")


def load_gray(name: str) -> np.ndarray:
    img = getattr(data, name)()
    if img.ndim == 3:
        img = color.rgb2gray(img)
    else:
        img = img.astype(np.float64) / 255.0
    return img[:512, :512]


def whiten(img: np.ndarray) -> np.ndarray:
    n = img.shape[0]
    fx, fy = np.meshgrid(np.arange(-n // 2, n // 2), np.arange(-n // 2, n // 2))
    rho = np.sqrt(fx**2 + fy**2)
    filt = rho * np.exp(-((rho / (0.4 * n)) ** 4))
    spectrum = np.fft.fftshift(np.fft.fft2(img - img.mean()))
    out = np.real(np.fft.ifft2(np.fft.ifftshift(spectrum * filt)))
    return out / out.std()


def to_pgm(img: np.ndarray, path: pathlib.Path, whitened: bool) -> np.ndarray:
    if whitened:
        level = np.round(np.clip(img / 16.0 + 0.5, 0.0, 1.0) * 65535.0)
        raster, maxval = level.astype(">u2"), 65535
        decoded = level / 65535.0 * 16.0 - 8.0
    else:
        raster, maxval = np.round(img * 255.0).astype(np.uint8), 255
        decoded = raster / 255.0
    header = f"P5\n{raster.shape[1]} {raster.shape[0]}\n{maxval}\n".encode()
    path.write_bytes(header + raster.tobytes())
    return decoded


def to_sct(stack: np.ndarray, path: pathlib.Path) -> None:
    header = b"SCT1" + bytes([stack.ndim]) + struct.pack(f"<{stack.ndim}Q", *stack.shape)
    path.write_bytes(header + stack.astype("<f8").tobytes())


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=pathlib.Path, required=True)
    parser.add_argument("--whiten", action="store_true")
    parser.add_argument("--names", nargs="*", default=list(NAMES))
    parser.add_argument("--sct", type=pathlib.Path, help="also write the decoded HxWxC stack")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    decoded = []
    for name in args.names:
        img = load_gray(name)
        if args.whiten:
            img = whiten(img)
        target = args.out / f"{name}{'_white' if args.whiten else ''}.pgm"
        decoded.append(to_pgm(img, target, args.whiten))
        print(target)
    if args.sct:
        to_sct(np.stack(decoded, axis=-1), args.sct)
        print(args.sct)


if __name__ == "__main__":
    main()
