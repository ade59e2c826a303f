# 局部代数恒等式验证套件
