# anchors rootdir so sibling helper modules (gen, qp_oracle) import cleanly
