"""VoxelGlass: a headless medical volume viewer engine.

Subpackages:
    dicom     -- DICOM parsing, anonymization, volume assembly, volume cache
    xfer      -- intensity windowing, 3D CLAHE, color schemes, transfer functions
    spaces    -- rigid poses, coordinate-space graph, marker pose estimation
    render    -- CPU volume renderers (texture-based, view-aligned, raycast)
    interact  -- hand gestures and virtual-plane sketching
    sync      -- multi-user session state server (TCP + WebSocket)
    bench     -- scripted-path frame-rate benchmarks
"""

__version__ = "0.1.0"
