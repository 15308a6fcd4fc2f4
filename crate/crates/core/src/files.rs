// placeholder: filled in module build order
