# 超额风险收敛速度验证套件
