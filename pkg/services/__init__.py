"""
Geometry services: projective model, Heisenberg boundary, elliptic tori,
sphere intersections, Ford cells and the triangle group certificate
"""
