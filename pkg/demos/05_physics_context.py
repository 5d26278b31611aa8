"""Physical context behind the degradations.

Plots blackbody radiance curves for several specimen temperatures (the
mechanism that washes out visible-band speckle contrast) and prints the
refractive-index change of heated air per the Gladstone-Dale relation
(the mechanism behind heat-haze warping).
"""

import numpy as np

from hotspeckle import gladstone_dale, planck_radiance

print("blackbody spectral radiance at 450 nm (W sr^-1 m^-3):")
for celsius in (500, 600, 700, 800, 900):
    temp = celsius + 273.15
    print(f"  {celsius:4d} C : {planck_radiance(450e-9, temp):12.4g}")

lams = np.linspace(300e-9, 5e-6, 3000)
for celsius in (500, 900):
    temp = celsius + 273.15
    peak = lams[int(np.argmax([planck_radiance(l, temp) for l in lams]))]
    print(f"radiance peak at {celsius} C: {peak * 1e9:.0f} nm")

print("\nrefractive index of air (Gladstone-Dale, k = 2.26e-4 m^3/kg):")
for label, rho in (("ambient, 1.225 kg/m^3", 1.225), ("450 C, ~0.49 kg/m^3", 0.49)):
    print(f"  {label:24s} n = {gladstone_dale(rho, 2.26e-4):.8f}")
print("the ~1.7e-4 index difference across a heated column bends rays enough")
print("to shift image features by fractions of a pixel, which DIC reads as strain")
