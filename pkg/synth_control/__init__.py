# Synthetic control studies on weekly panels
